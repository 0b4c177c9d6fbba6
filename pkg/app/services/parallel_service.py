"""
Параллельная архитектура tuGEMM.

N векторных счётчиков (по одному на шаг) считают одновременно с той же
вложенной семантикой, что счётчики столбцов/строк последовательного
варианта. Каждая выходная ячейка за такт суммирует N вкладов из {-1, 0, +1}.
Векторный счётчик с обнулёнными столбцами поднимает col_done, гасит свои
унарные линии и замирает; output_ready = AND всех col_done.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from app.models.schemas import GemmProblem, Matrix, OutputWidthPolicy, SimResult, Variant
from app.services.hardware import (
    ENGINE_CYCLE,
    ENGINE_EVENT,
    ActivityCounter,
    OutputGuard,
    SignalTracker,
    SignRule,
    line_profile,
    resolve_engine,
    same_sign_rule,
    sweep_vector_counter,
    toward_zero,
)
from app.services.problem_service import require_valid

logger = logging.getLogger(__name__)


@dataclass
class ParallelState:
    """Состояние N векторных счётчиков и массива выходных сумматоров"""
    col_counters: np.ndarray  # (N, M)
    neg_col: np.ndarray
    row_counters: np.ndarray  # (N, P)
    neg_row: np.ndarray
    output_cells: np.ndarray  # (M, P)
    cycle: int = 0

    @property
    def col_done(self) -> np.ndarray:
        return ~self.col_counters.any(axis=1)

    @property
    def output_ready(self) -> bool:
        return bool(self.col_done.all())


@dataclass(frozen=True)
class ParallelCycle:
    cycle: int
    enabled_contributions: int
    contribution_total: int
    col_done: Tuple[bool, ...]
    cell_sums: np.ndarray  # (M, P), сумма вкладов N шагов за такт


class ParallelEngine:
    """Потактовый движок параллельной архитектуры"""

    engine_name = ENGINE_CYCLE

    def __init__(
        self,
        problem: GemmProblem,
        policy: Optional[OutputWidthPolicy] = None,
        sign_rule: SignRule = same_sign_rule,
    ):
        self.m, self.n, self.p = problem.m, problem.n, problem.p
        self._b = problem.b.to_array()
        self.sign_rule = sign_rule
        self.guard = OutputGuard(policy, problem.width)

        cols = problem.a.to_array().T.copy()
        rows = self._b.copy()
        self.state = ParallelState(
            col_counters=cols,
            neg_col=cols < 0,
            row_counters=rows,
            neg_row=rows < 0,
            output_cells=problem.c.to_array().copy(),
        )
        self.activity = ActivityCounter()
        self.activity.load(lines=self.m + self.p, count=self.n)
        self.col_lines = SignalTracker((self.n, self.m))
        self.row_lines = SignalTracker((self.n, self.p))
        self.col_lines.load()
        self.row_lines.load()
        self.unit_cycles = np.zeros(self.n, dtype=np.int64)
        self._signs = sign_rule(self.state.neg_col, self.state.neg_row)
        self._started = False
        self._closed = False

        self.guard.check(self.state.output_cells, 0)

    @property
    def finished(self) -> bool:
        # Минимум один управляющий такт даже для пустой задачи
        return self._started and self.state.output_ready

    def tick(self) -> ParallelCycle:
        st = self.state
        if self.finished:
            raise RuntimeError("GEMM уже завершён (output_ready)")
        self._started = True

        active = ~st.col_done
        col_on = st.col_counters != 0
        row_on = (st.row_counters != 0) & active[:, None]
        self.col_lines.observe(col_on)
        self.row_lines.observe(row_on)

        enabled = col_on[:, :, None] & row_on[:, None, :]
        contributions = np.where(enabled, self._signs, 0)
        cell_sums = contributions.sum(axis=0)
        st.output_cells += cell_sums
        self.activity.record_updates(contributions)
        st.cycle += 1
        self.guard.check(st.output_cells, st.cycle)

        st.row_counters[active] = toward_zero(st.row_counters[active])
        rows_done = active & ~st.row_counters.any(axis=1)
        st.col_counters[rows_done] = toward_zero(st.col_counters[rows_done])
        reload = rows_done & st.col_counters.any(axis=1)
        st.row_counters[reload] = self._b[reload]
        self.activity.load(lines=self.p, count=int(reload.sum()))
        self.row_lines.load(where=reload)

        just_done = active & st.col_done
        self.unit_cycles[just_done] = st.cycle

        return ParallelCycle(
            cycle=st.cycle,
            enabled_contributions=int(enabled.sum()),
            contribution_total=int(cell_sums.sum()),
            col_done=tuple(bool(v) for v in st.col_done),
            cell_sums=cell_sums,
        )

    def cycles(self) -> Iterator[ParallelCycle]:
        while not self.finished:
            yield self.tick()

    def run(self) -> SimResult:
        for _ in self.cycles():
            pass
        return self.result()

    def result(self) -> SimResult:
        if not self._closed:
            self.col_lines.close()
            self.row_lines.close()
            self._closed = True
        transitions = self.col_lines.transitions + self.row_lines.transitions
        line_transitions, line_loads = line_profile(self.col_lines, self.row_lines)
        return SimResult(
            variant=Variant.PARALLEL,
            y=Matrix.from_array(self.state.output_cells),
            cycles=self.state.cycle,
            activity=self.activity.to_stats(transitions),
            step_cycles=tuple(max(int(v), 1) for v in self.unit_cycles),
            engine=self.engine_name,
            line_transitions=line_transitions,
            line_loads=line_loads,
        )


class ParallelEventEngine:
    """Движок параллельной архитектуры по событиям: векторные счётчики независимы"""

    engine_name = ENGINE_EVENT

    def __init__(self, problem: GemmProblem, sign_rule: SignRule = same_sign_rule):
        self.problem = problem
        self.sign_rule = sign_rule

    def run(self) -> SimResult:
        problem = self.problem
        a = problem.a.to_array()
        b = problem.b.to_array()
        cells = problem.c.to_array().copy()
        activity = ActivityCounter()

        unit_cycles = []
        col_banks, row_banks = [], []
        for i in range(problem.n):
            activity.load(lines=problem.m + problem.p)
            col_lines = SignalTracker(problem.m)
            row_lines = SignalTracker(problem.p)
            col_lines.load()
            row_lines.load()
            unit_cycles.append(
                sweep_vector_counter(
                    a[:, i], b[i], cells, activity, col_lines, row_lines, self.sign_rule, gate_idle=True
                )
            )
            col_lines.close()
            row_lines.close()
            col_banks.append(col_lines)
            row_banks.append(row_lines)

        line_transitions, line_loads = line_profile(*col_banks, *row_banks)
        return SimResult(
            variant=Variant.PARALLEL,
            y=Matrix.from_array(cells),
            cycles=max(max(unit_cycles), 1),
            activity=activity.to_stats(sum(line_transitions)),
            step_cycles=tuple(unit_cycles),
            engine=self.engine_name,
            line_transitions=line_transitions,
            line_loads=line_loads,
        )


def parallel_run(
    problem: GemmProblem,
    policy: Optional[OutputWidthPolicy] = None,
    engine: Optional[str] = None,
    sign_rule: SignRule = same_sign_rule,
) -> SimResult:
    """Смоделировать параллельный tuGEMM"""
    require_valid(problem)
    engine = resolve_engine(engine, policy)
    if engine == ENGINE_EVENT:
        result = ParallelEventEngine(problem, sign_rule).run()
    else:
        result = ParallelEngine(problem, policy, sign_rule).run()
    logger.debug(
        f"Parallel {problem.m}x{problem.n}x{problem.p} w={problem.width.w}: "
        f"{result.cycles} cycles ({engine})"
    )
    return result


def parallel_cell_trace(problem: GemmProblem, m: int, q: int) -> List[int]:
    """Сумма вкладов N шагов в ячейку (m, q) на каждом такте"""
    require_valid(problem)
    if not (0 <= m < problem.m and 0 <= q < problem.p):
        raise IndexError(f"Ячейка ({m}, {q}) вне выхода {problem.m}x{problem.p}")
    engine = ParallelEngine(problem)
    return [int(record.cell_sums[m, q]) for record in engine.cycles()]
