"""
Аналитическая модель задержки tuGEMM.

Шаг i длится L_i = C_i * max(R_i, 1) тактов при C_i > 0 и 1 такт иначе,
где C_i = max_m |A[m][i]|, R_i = max_p |B[i][p]|. Последовательный вариант
суммирует шаги, параллельный берёт максимум (не меньше 1).

Оценка средней задержки знает только максимальный модуль операции и
считает, что все C_i и R_i равны ему, поэтому это верхняя граница.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Sequence, Union

import numpy as np

from app.models.schemas import BitWidth, GemmProblem, LatencyBreakdown, Variant
from app.services.problem_service import require_valid

logger = logging.getLogger(__name__)


def step_latency(col_max: int, row_max: int) -> int:
    if col_max == 0:
        return 1
    return col_max * max(row_max, 1)


def analytic_latency(problem: GemmProblem) -> LatencyBreakdown:
    require_valid(problem)
    col_max = np.abs(problem.a.to_array()).max(axis=0)
    row_max = np.abs(problem.b.to_array()).max(axis=1)
    per_step = [step_latency(int(c), int(r)) for c, r in zip(col_max, row_max)]
    return LatencyBreakdown.from_steps(per_step)


def worst_case_latency(n: int, w: Union[int, BitWidth], variant: Variant) -> int:
    """serial: N * (2^(w-1))^2, parallel: (2^(w-1))^2"""
    if n < 1:
        raise ValueError(f"n должно быть >= 1, получено {n}")
    width = w if isinstance(w, BitWidth) else BitWidth(w=w)
    step = width.max_magnitude ** 2
    return n * step if Variant(variant) == Variant.SERIAL else step


def _latency_at(value: Union[int, Fraction], n: int, variant: Variant) -> Union[int, Fraction]:
    step = max(value * value, 1)
    return n * step if Variant(variant) == Variant.SERIAL else step


def avg_latency_from_max(max_value: int, n: int, variant: Variant, w: int = None) -> int:
    """Задержка при условии, что все C_i и R_i равны max_value (0 даёт по такту на шаг)"""
    if max_value < 0:
        raise ValueError(f"max_value должен быть >= 0, получено {max_value}")
    if w is not None and max_value > BitWidth(w=w).max_magnitude:
        raise ValueError(f"max_value={max_value} больше 2^(w-1) для w={w}")
    if n < 1:
        raise ValueError(f"n должно быть >= 1, получено {n}")
    return int(_latency_at(max_value, n, variant))


def latency_at_mean(mean_max: Fraction, n: int, variant: Variant) -> Fraction:
    """Та же оценка для дробного среднего максимума"""
    return Fraction(_latency_at(Fraction(mean_max), n, variant))


def quadratic_ratio(worst_max: int, avg_max: Union[int, Fraction]) -> float:
    """(worst/avg)^2: во сколько раз средняя задержка ниже худшей, например (128/41)^2 ~ 9.75"""
    if avg_max == 0:
        return float(worst_max * worst_max)
    return float((Fraction(worst_max) / Fraction(avg_max)) ** 2)


def latency_sweep(ns: Sequence[int] = (16, 32), widths: Sequence[int] = (2, 4, 8)) -> List[Dict[str, int]]:
    """Таблица худших задержек по размерам и разрядностям"""
    rows = []
    for n in ns:
        for w in widths:
            serial = worst_case_latency(n, w, Variant.SERIAL)
            parallel = worst_case_latency(n, w, Variant.PARALLEL)
            rows.append({
                "n": n,
                "w": w,
                "serial": serial,
                "parallel": parallel,
                "speedup": serial // parallel,
            })
    return rows
