"""
Последовательная архитектура tuGEMM.

Счётчик индекса перебирает шаги 0..N-1. На каждом шаге i-й столбец A
загружается в M счётчиков столбцов, i-я строка B в P счётчиков строк.
Счётчики строк сдвигаются к нулю каждый такт; когда все они обнулились,
счётчики столбцов сдвигаются на 1, а строки перезагружаются тем же
вектором. Ячейка (m, p) обновляется на +-1, пока подняты unary_col[m]
и unary_row[p]. Массив выходных счётчиков инициализируется матрицей C.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from app.models.schemas import (
    GemmProblem,
    LatencyBreakdown,
    Matrix,
    OutputWidthPolicy,
    SimResult,
    Variant,
)
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
class SerialState:
    """Состояние последовательного tuGEMM; принадлежит одному движку"""
    n: int
    step_index: int
    col_counters: np.ndarray
    neg_col: np.ndarray
    row_counters: np.ndarray
    neg_row: np.ndarray
    output_cells: np.ndarray
    cycle: int = 0

    @property
    def output_ready(self) -> bool:
        return self.step_index == self.n

    @property
    def unary_col(self) -> np.ndarray:
        return self.col_counters != 0

    @property
    def unary_row(self) -> np.ndarray:
        return self.row_counters != 0


@dataclass(frozen=True)
class SerialCycle:
    """Снимок одного такта: счётчики на начало такта и события такта"""
    cycle: int
    step_index: int
    col_counters: Tuple[int, ...]
    row_counters: Tuple[int, ...]
    enabled_cells: int
    col_update: bool
    step_done: bool


class SerialEngine:
    """Потактовый движок последовательной архитектуры"""

    engine_name = ENGINE_CYCLE

    def __init__(
        self,
        problem: GemmProblem,
        policy: Optional[OutputWidthPolicy] = None,
        sign_rule: SignRule = same_sign_rule,
    ):
        self._a = problem.a.to_array()
        self._b = problem.b.to_array()
        self.m, self.n, self.p = problem.m, problem.n, problem.p
        self.sign_rule = sign_rule
        self.guard = OutputGuard(policy, problem.width)

        self.state = SerialState(
            n=self.n,
            step_index=0,
            col_counters=np.zeros(self.m, dtype=np.int64),
            neg_col=np.zeros(self.m, dtype=bool),
            row_counters=np.zeros(self.p, dtype=np.int64),
            neg_row=np.zeros(self.p, dtype=bool),
            output_cells=problem.c.to_array().copy(),
        )
        self.activity = ActivityCounter()
        self.col_lines = SignalTracker(self.m)
        self.row_lines = SignalTracker(self.p)
        self.step_cycles: List[int] = []
        self._step_start = 0
        self._closed = False

        self.guard.check(self.state.output_cells, 0)
        self._load_step()

    def _load_step(self) -> None:
        st = self.state
        if st.output_ready:
            return
        i = st.step_index
        st.col_counters = self._a[:, i].copy()
        st.neg_col = st.col_counters < 0
        st.row_counters = self._b[i].copy()
        st.neg_row = st.row_counters < 0
        self.activity.load(lines=self.m)
        self.activity.load(lines=self.p)
        self.col_lines.load()
        self.row_lines.load()
        self._step_start = st.cycle

    def tick(self) -> SerialCycle:
        st = self.state
        if st.output_ready:
            raise RuntimeError("GEMM уже завершён (output_ready)")

        col_before = tuple(int(v) for v in st.col_counters)
        row_before = tuple(int(v) for v in st.row_counters)
        col_on = st.unary_col
        row_on = st.unary_row
        self.col_lines.observe(col_on)
        self.row_lines.observe(row_on)

        enabled = np.outer(col_on, row_on)
        updates = np.where(enabled, self.sign_rule(st.neg_col, st.neg_row), 0)
        st.output_cells += updates
        self.activity.record_updates(updates)
        st.cycle += 1
        self.guard.check(st.output_cells, st.cycle)

        # Строки считают каждый такт, столбцы только после обнуления всех строк
        st.row_counters = toward_zero(st.row_counters)
        col_update = False
        if not st.row_counters.any():
            col_update = bool(st.col_counters.any())
            st.col_counters = toward_zero(st.col_counters)
            if st.col_counters.any():
                st.row_counters = self._b[st.step_index].copy()
                self.activity.load(lines=self.p)
                self.row_lines.load()

        step_done = not st.col_counters.any()
        record = SerialCycle(
            cycle=st.cycle,
            step_index=st.step_index,
            col_counters=col_before,
            row_counters=row_before,
            enabled_cells=int(enabled.sum()),
            col_update=col_update,
            step_done=step_done,
        )
        if step_done:
            self.step_cycles.append(st.cycle - self._step_start)
            logger.debug(f"Step {st.step_index} done after {self.step_cycles[-1]} cycles")
            st.step_index += 1
            self._load_step()
        return record

    def cycles(self) -> Iterator[SerialCycle]:
        while not self.state.output_ready:
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
            variant=Variant.SERIAL,
            y=Matrix.from_array(self.state.output_cells),
            cycles=self.state.cycle,
            activity=self.activity.to_stats(transitions),
            step_cycles=tuple(self.step_cycles),
            engine=self.engine_name,
            line_transitions=line_transitions,
            line_loads=line_loads,
        )


class SerialEventEngine:
    """Движок последовательной архитектуры, шагающий по событиям счётчиков столбцов"""

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
        col_lines = SignalTracker(problem.m)
        row_lines = SignalTracker(problem.p)

        step_cycles = []
        for i in range(problem.n):
            activity.load(lines=problem.m)
            activity.load(lines=problem.p)
            col_lines.load()
            row_lines.load()
            step_cycles.append(
                sweep_vector_counter(a[:, i], b[i], cells, activity, col_lines, row_lines, self.sign_rule)
            )

        col_lines.close()
        row_lines.close()
        line_transitions, line_loads = line_profile(col_lines, row_lines)
        return SimResult(
            variant=Variant.SERIAL,
            y=Matrix.from_array(cells),
            cycles=sum(step_cycles),
            activity=activity.to_stats(col_lines.transitions + row_lines.transitions),
            step_cycles=tuple(step_cycles),
            engine=self.engine_name,
            line_transitions=line_transitions,
            line_loads=line_loads,
        )


def serial_run(
    problem: GemmProblem,
    policy: Optional[OutputWidthPolicy] = None,
    engine: Optional[str] = None,
    sign_rule: SignRule = same_sign_rule,
) -> SimResult:
    """Смоделировать последовательный tuGEMM"""
    require_valid(problem)
    engine = resolve_engine(engine, policy)
    if engine == ENGINE_EVENT:
        result = SerialEventEngine(problem, sign_rule).run()
    else:
        result = SerialEngine(problem, policy, sign_rule).run()
    logger.debug(
        f"Serial {problem.m}x{problem.n}x{problem.p} w={problem.width.w}: "
        f"{result.cycles} cycles ({engine})"
    )
    return result


def serial_step_trace(problem: GemmProblem, engine: Optional[str] = None) -> LatencyBreakdown:
    """Такты каждого шага, наблюдаемые движком"""
    result = serial_run(problem, engine=engine)
    return LatencyBreakdown.from_steps(list(result.step_cycles))
