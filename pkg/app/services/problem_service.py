"""
Сервис задач GEMM: проверка инвариантов и детерминированная генерация.

Генератор: numpy PCG64 (PCG-64 XSL-RR). Seed приводится по модулю 2^64,
элементы выбираются равномерно из [-2^(w-1), 2^(w-1)-1] в порядке
A, B, C построчно.
"""
import logging
from typing import Optional

import numpy as np

from app.config import get_settings
from app.errors import ProblemValidationError
from app.models.schemas import (
    BitWidth,
    GemmProblem,
    HardwareInventory,
    Matrix,
    ValidationVerdict,
    Variant,
)

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


def _range_violation(name: str, matrix: Matrix, width: BitWidth) -> Optional[ValidationVerdict]:
    for idx, value in enumerate(matrix.data):
        if not width.contains(value):
            r, c = divmod(idx, matrix.cols)
            return ValidationVerdict(
                ok=False,
                kind="range",
                matrix=name,
                index=(r, c),
                message=(
                    f"{name}[{r}][{c}] = {value} вне диапазона "
                    f"[{width.min_value}, {width.max_value}] для w={width.w}"
                ),
            )
    return None


def validate_problem(problem: GemmProblem) -> ValidationVerdict:
    """
    Проверить инварианты задачи.

    Возвращает первое нарушенное условие: сначала разрядность,
    затем согласованность размеров, затем диапазоны A, B, C.
    """
    settings = get_settings()
    a, b, c, width = problem.a, problem.b, problem.c, problem.width

    if width.w > settings.MAX_WIDTH:
        return ValidationVerdict(
            ok=False,
            kind="width",
            message=f"w={width.w} превышает MAX_WIDTH={settings.MAX_WIDTH}",
        )

    if a.cols != b.rows:
        return ValidationVerdict(
            ok=False,
            kind="dimension",
            matrix="b",
            message=f"a.cols ({a.cols}) != b.rows ({b.rows})",
        )
    if a.rows != c.rows:
        return ValidationVerdict(
            ok=False,
            kind="dimension",
            matrix="c",
            message=f"a.rows ({a.rows}) != c.rows ({c.rows})",
        )
    if b.cols != c.cols:
        return ValidationVerdict(
            ok=False,
            kind="dimension",
            matrix="c",
            message=f"b.cols ({b.cols}) != c.cols ({c.cols})",
        )
    if a.cols > settings.MAX_INNER_DIM:
        return ValidationVerdict(
            ok=False,
            kind="dimension",
            matrix="a",
            message=f"N={a.cols} превышает MAX_INNER_DIM={settings.MAX_INNER_DIM}",
        )

    for name, matrix in (("a", a), ("b", b), ("c", c)):
        violation = _range_violation(name, matrix, width)
        if violation:
            return violation

    return ValidationVerdict(ok=True)


def require_valid(problem: GemmProblem) -> GemmProblem:
    """Проверить задачу и выбросить ProblemValidationError при нарушении"""
    verdict = validate_problem(problem)
    if not verdict.ok:
        raise ProblemValidationError(verdict)
    return problem


def random_problem(m: int, n: int, p: int, w: int, seed: int) -> GemmProblem:
    """Сгенерировать задачу; одинаковые аргументы дают побитово одинаковый результат"""
    if min(m, n, p) < 1:
        raise ValueError(f"Размеры должны быть >= 1, получено {m}x{n}x{p}")
    width = BitWidth(w=w)
    rng = np.random.Generator(np.random.PCG64(seed & SEED_MASK))

    def draw(rows: int, cols: int) -> Matrix:
        values = rng.integers(
            width.min_value, width.max_value, size=(rows, cols), dtype=np.int64, endpoint=True
        )
        return Matrix.from_array(values)

    a = draw(m, n)
    b = draw(n, p)
    c = draw(m, p)
    return GemmProblem(a=a, b=b, c=c, width=width)


def hardware_inventory(m: int, n: int, p: int, variant: Variant) -> HardwareInventory:
    """Перечень аппаратных блоков serial/parallel варианта"""
    if variant == Variant.SERIAL:
        return HardwareInventory(
            variant=variant,
            m=m, n=n, p=p,
            index_counters=1,
            vector_generators=2,
            column_counters=m,
            row_counters=p,
            vector_counters=0,
            output_cells=m * p,
            output_cell_kind="counter",
            unary_lines=m + p,
            neg_lines=m + p,
        )
    # Векторный счётчик объединяет генераторы и счётчики одного шага, N копий
    return HardwareInventory(
        variant=variant,
        m=m, n=n, p=p,
        index_counters=0,
        vector_generators=0,
        column_counters=n * m,
        row_counters=n * p,
        vector_counters=n,
        output_cells=m * p,
        output_cell_kind="adder",
        unary_lines=n * (m + p),
        neg_lines=n * (m + p),
    )
