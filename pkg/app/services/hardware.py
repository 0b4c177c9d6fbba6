"""
Общие аппаратные блоки обоих вариантов tuGEMM: счётчики к нулю,
правило знака выходной ячейки, учёт переключений унарных линий,
контроль разрядности выходных регистров и выбор движка.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.errors import ConfigError, OutputOverflowError
from app.models.schemas import ActivityStats, BitWidth, OutputWidthPolicy

logger = logging.getLogger(__name__)

ENGINE_CYCLE = "cycle"
ENGINE_EVENT = "event"
ENGINE_AUTO = "auto"
ENGINES = (ENGINE_CYCLE, ENGINE_EVENT, ENGINE_AUTO)

SignRule = Callable[[np.ndarray, np.ndarray], np.ndarray]


def same_sign_rule(neg_col: np.ndarray, neg_row: np.ndarray) -> np.ndarray:
    """+1, если знаки столбца и строки совпадают, иначе -1. Форма (..., M, P)"""
    same = neg_col[..., :, None] == neg_row[..., None, :]
    return np.where(same, 1, -1).astype(np.int64)


def flipped_sign_rule(neg_col: np.ndarray, neg_row: np.ndarray) -> np.ndarray:
    """Внесённая неисправность: при двух отрицательных входах ячейка уменьшается"""
    signs = same_sign_rule(neg_col, neg_row)
    both_negative = neg_col[..., :, None] & neg_row[..., None, :]
    return np.where(both_negative, -signs, signs)


def toward_zero(counts: np.ndarray) -> np.ndarray:
    """Шаг счётчика к нулю: вычитание для положительных, прибавление для отрицательных"""
    return counts - np.sign(counts)


class SignalTracker:
    """Считает переходы 0->1 и 1->0 и загрузки каждой линии банка унарных линий"""

    def __init__(self, shape):
        self.levels = np.zeros(shape, dtype=bool)
        self.line_transitions = np.zeros(shape, dtype=np.int64)
        self.line_loads = np.zeros(shape, dtype=np.int64)

    @property
    def transitions(self) -> int:
        return int(self.line_transitions.sum())

    def load(self, count: int = 1, where: Optional[np.ndarray] = None) -> None:
        """Загрузка счётчиков за линиями; where выбирает часть банка по первой оси"""
        if where is None:
            self.line_loads += count
        else:
            self.line_loads[where] += count

    def observe(self, levels: np.ndarray) -> None:
        levels = np.asarray(levels, dtype=bool)
        self.line_transitions += levels != self.levels
        self.levels = levels.copy()

    def observe_periodic(self, first: np.ndarray, last: np.ndarray, repeats: int) -> None:
        """Уровни first..last, повторённые repeats раз подряд (монотонно внутри периода)"""
        self.observe(first)
        changed = np.asarray(first, dtype=bool) != np.asarray(last, dtype=bool)
        self.line_transitions += (2 * repeats - 1) * changed
        self.levels = np.array(last, dtype=bool)

    def close(self) -> None:
        self.observe(np.zeros_like(self.levels))


def line_profile(*trackers: SignalTracker) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Переходы и загрузки всех линий в порядке банков"""
    transitions = np.concatenate([t.line_transitions.reshape(-1) for t in trackers])
    loads = np.concatenate([t.line_loads.reshape(-1) for t in trackers])
    return tuple(int(v) for v in transitions), tuple(int(v) for v in loads)


def transition_bound_holds(line_transitions: Sequence[int], line_loads: Sequence[int]) -> bool:
    """Не больше двух переходов на каждую загрузку, для каждой линии отдельно"""
    transitions = np.asarray(line_transitions, dtype=np.int64)
    loads = np.asarray(line_loads, dtype=np.int64)
    return transitions.shape == loads.shape and bool(np.all(transitions <= 2 * loads))


@dataclass
class ActivityCounter:
    output_cell_updates: int = 0
    positive_updates: int = 0
    negative_updates: int = 0
    counter_loads: int = 0
    line_loads: int = 0

    def record_updates(self, updates: np.ndarray) -> None:
        positive = int(updates[updates > 0].sum())
        negative = int(-updates[updates < 0].sum())
        self.positive_updates += positive
        self.negative_updates += negative
        self.output_cell_updates += positive + negative

    def load(self, lines: int, count: int = 1) -> None:
        self.counter_loads += count
        self.line_loads += lines * count

    def to_stats(self, transitions: int) -> ActivityStats:
        return ActivityStats(
            output_cell_updates=self.output_cell_updates,
            positive_updates=self.positive_updates,
            negative_updates=self.negative_updates,
            unary_signal_transitions=transitions,
            counter_loads=self.counter_loads,
            line_loads=self.line_loads,
        )


class OutputGuard:
    """Проверяет, что аккумуляторы остаются в диапазоне фиксированной разрядности"""

    def __init__(self, policy: Optional[OutputWidthPolicy], width: BitWidth):
        self.policy = policy or OutputWidthPolicy.unbounded()
        if self.policy.is_fixed and self.policy.bits < width.w:
            raise ConfigError(f"Разрядность выхода {self.policy.bits} меньше w={width.w}")
        self.bounds = self.policy.bounds

    def check(self, cells: np.ndarray, cycle: int) -> None:
        if self.bounds is None:
            return
        lo, hi = self.bounds
        outside = np.argwhere((cells < lo) | (cells > hi))
        if len(outside):
            r, c = (int(v) for v in outside[0])
            raise OutputOverflowError((r, c), cycle, int(cells[r, c]), self.policy.bits)


def resolve_engine(
    requested: Optional[str],
    policy: Optional[OutputWidthPolicy] = None,
    needs_cycles: bool = False,
) -> str:
    """Выбрать движок: event не видит отдельных тактов, поэтому не годится для fixed и трасс"""
    engine = requested or get_settings().SIM_ENGINE
    if engine not in ENGINES:
        raise ConfigError(f"Неизвестный движок {engine!r}, допустимы {', '.join(ENGINES)}")
    per_cycle = needs_cycles or (policy is not None and policy.is_fixed)
    if engine == ENGINE_AUTO:
        return ENGINE_CYCLE if per_cycle else ENGINE_EVENT
    if engine == ENGINE_EVENT and per_cycle:
        logger.warning("⚠️ Event engine cannot observe single cycles, falling back to cycle engine")
        return ENGINE_CYCLE
    return engine


def sweep_vector_counter(
    col: np.ndarray,
    row: np.ndarray,
    cells: np.ndarray,
    activity: ActivityCounter,
    col_lines: SignalTracker,
    row_lines: SignalTracker,
    sign_rule: SignRule = same_sign_rule,
    gate_idle: bool = False,
) -> int:
    """
    Прогнать один шаг (столбец A x строку B) по событиям счётчика столбцов.

    Между двумя событиями столбцов счётчики строк повторяют один и тот же
    проход длиной max(R, 1) тактов, поэтому вклад в ячейки и переходы линий
    накапливаются сразу за весь отрезок. Счётчики уже загружены вызывающим.

    Returns:
        int: число тактов шага
    """
    mag_col = np.abs(col)
    mag_row = np.abs(row)
    col_max = int(mag_col.max())
    row_max = int(mag_row.max())

    if col_max == 0:
        # Шаг без работы: один управляющий такт
        col_lines.observe(np.zeros_like(mag_col, dtype=bool))
        if gate_idle:
            row_lines.observe(np.zeros_like(mag_row, dtype=bool))
        else:
            row_lines.observe(mag_row > 0)
        return 1

    sweep = max(row_max, 1)
    signs = sign_rule(col < 0, row < 0)
    row_first = mag_row >= 1
    row_last = mag_row >= sweep

    done = 0
    for threshold in np.unique(mag_col[mag_col > 0]):
        threshold = int(threshold)
        repeats = threshold - done
        col_on = mag_col >= threshold
        col_lines.observe(col_on)
        row_lines.observe_periodic(row_first, row_last, repeats)
        updates = signs * np.outer(col_on, mag_row) * repeats
        cells += updates
        activity.record_updates(updates)
        done = threshold

    # Перезагрузка строк при каждом обновлении столбцов, кроме последнего
    activity.load(lines=len(row), count=col_max - 1)
    row_lines.load(count=col_max - 1)
    return col_max * sweep
