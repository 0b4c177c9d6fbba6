"""
Рандомизированная проверка точности и модели задержки.

Каждое испытание сравнивает оба варианта с эталоном, такты с аналитической
моделью, счётчики активности с суммой |A||B| и переходы каждой унарной
линии с границей 2 на загрузку. Испытания независимы и могут идти в
пуле процессов; итог не зависит от порядка их завершения.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.models.schemas import GemmProblem, Matrix, MismatchRecord, VerifySummary
from app.services.hardware import ENGINE_EVENT, flipped_sign_rule, same_sign_rule, transition_bound_holds
from app.services.latency_service import analytic_latency
from app.services.matrix_io import dump_problem
from app.services.oracle_service import gemm_exact
from app.services.parallel_service import parallel_run
from app.services.problem_service import random_problem
from app.services.serial_service import serial_run

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialSpec:
    index: int
    m: int
    n: int
    p: int
    w: int
    seed: int

    def problem(self) -> GemmProblem:
        return random_problem(self.m, self.n, self.p, self.w, self.seed)


@dataclass(frozen=True)
class TrialOutcome:
    spec: TrialSpec
    failed_checks: Tuple[str, ...]


def expected_updates(problem: GemmProblem) -> Tuple[int, int]:
    """(положительные, отрицательные) обновления ячеек по правилу знака"""
    a = problem.a.to_array()
    b = problem.b.to_array()
    a_pos, a_neg = np.where(a > 0, a, 0), np.where(a < 0, -a, 0)
    b_pos, b_neg = np.where(b > 0, b, 0), np.where(b < 0, -b, 0)
    positive = int((a_pos @ b_pos).sum() + (a_neg @ b_neg).sum())
    negative = int((a_pos @ b_neg).sum() + (a_neg @ b_pos).sum())
    return positive, negative


def check_problem(problem: GemmProblem, fault: bool = False, engine: str = ENGINE_EVENT) -> List[str]:
    """Прогнать все проверки на одной задаче, вернуть имена проваленных"""
    sign_rule = flipped_sign_rule if fault else same_sign_rule
    oracle = gemm_exact(problem)
    serial = serial_run(problem, engine=engine, sign_rule=sign_rule)
    parallel = parallel_run(problem, engine=engine, sign_rule=sign_rule)
    analytic = analytic_latency(problem)
    positive, negative = expected_updates(problem)

    checks = {
        "serial_exact": serial.y == oracle,
        "parallel_exact": parallel.y == oracle,
        "serial_latency": serial.cycles == analytic.serial_total,
        "parallel_latency": parallel.cycles == analytic.parallel_total,
        "step_trace": serial.step_cycles == analytic.per_step,
        "serial_activity": serial.activity.output_cell_updates == positive + negative,
        "parallel_activity": parallel.activity.output_cell_updates == positive + negative,
        "sign_rule": (
            serial.activity.positive_updates == positive
            and serial.activity.negative_updates == negative
        ),
        "serial_transitions": transition_bound_holds(serial.line_transitions, serial.line_loads),
        "parallel_transitions": transition_bound_holds(parallel.line_transitions, parallel.line_loads),
    }
    return [name for name, passed in checks.items() if not passed]


def run_trial(spec: TrialSpec, fault: bool = False) -> TrialOutcome:
    return TrialOutcome(spec=spec, failed_checks=tuple(check_problem(spec.problem(), fault)))


def _run_trial_faulty(spec: TrialSpec) -> TrialOutcome:
    return run_trial(spec, fault=True)


def generate_trials(
    trials: int,
    max_dim: int,
    widths: Sequence[int],
    seed: int,
    large_trials: int = 0,
    large_dim: int = 16,
    large_width: int = 8,
) -> Iterator[TrialSpec]:
    """Детерминированная последовательность испытаний из одного seed"""
    rng = np.random.Generator(np.random.PCG64(seed))
    widths = list(widths)
    for index in range(trials):
        m, n, p = (int(v) for v in rng.integers(1, max_dim, size=3, endpoint=True))
        w = widths[int(rng.integers(0, len(widths)))]
        yield TrialSpec(index=index, m=m, n=n, p=p, w=w, seed=int(rng.integers(0, 1 << 63)))
    for offset in range(large_trials):
        yield TrialSpec(
            index=trials + offset,
            m=large_dim, n=large_dim, p=large_dim, w=large_width,
            seed=int(rng.integers(0, 1 << 63)),
        )


def _shrink_candidates(problem: GemmProblem) -> Iterator[GemmProblem]:
    a, b, c = problem.a.to_array(), problem.b.to_array(), problem.c.to_array()

    def build(a_, b_, c_) -> GemmProblem:
        return GemmProblem(
            a=Matrix.from_array(a_), b=Matrix.from_array(b_), c=Matrix.from_array(c_), width=problem.width
        )

    for i in range(problem.n if problem.n > 1 else 0):
        yield build(np.delete(a, i, axis=1), np.delete(b, i, axis=0), c)
    for r in range(problem.m if problem.m > 1 else 0):
        yield build(np.delete(a, r, axis=0), b, np.delete(c, r, axis=0))
    for q in range(problem.p if problem.p > 1 else 0):
        yield build(a, np.delete(b, q, axis=1), np.delete(c, q, axis=1))
    for target in (a, b, c):
        for index in zip(*np.nonzero(target)):
            original = target[index]
            target[index] = 0
            yield build(a, b, c)
            target[index] = original


def minimize_problem(problem: GemmProblem, fails: Callable[[GemmProblem], bool]) -> GemmProblem:
    """Жадно уменьшать задачу, пока ошибка воспроизводится"""
    current = problem
    changed = True
    while changed:
        changed = False
        for candidate in _shrink_candidates(current):
            if fails(candidate):
                current = candidate
                changed = True
                break
    return current


def _dump_reproducer(spec: TrialSpec, fault: bool, reproducer_dir: Path) -> str:
    minimized = minimize_problem(spec.problem(), lambda candidate: bool(check_problem(candidate, fault)))
    path = dump_problem(minimized, reproducer_dir / f"trial_{spec.index}_seed_{spec.seed}.txt")
    logger.warning(
        f"⚠️ Reproducer for trial {spec.index}: {minimized.m}x{minimized.n}x{minimized.p} -> {path}"
    )
    return str(path)


def verify(
    trials: int,
    max_dim: int = 8,
    widths: Sequence[int] = (2, 4, 8),
    seed: int = 0,
    large_trials: int = 0,
    large_dim: int = 16,
    large_width: int = 8,
    workers: Optional[int] = None,
    reproducer_dir: Optional[str] = None,
    fault: bool = False,
) -> VerifySummary:
    """Рандомизированная проверка эквивалентности и модели задержки"""
    if trials < 1:
        raise ValueError(f"trials должно быть >= 1, получено {trials}")
    settings = get_settings()
    workers = workers if workers is not None else settings.VERIFY_WORKERS
    reproducer_dir = Path(reproducer_dir or settings.REPRODUCER_DIR)

    specs = list(generate_trials(trials, max_dim, widths, seed, large_trials, large_dim, large_width))
    runner = _run_trial_faulty if fault else run_trial
    logger.info(f"🚀 Verifying {len(specs)} trials (workers={workers}, seed={seed})")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(runner, specs, chunksize=64))
    else:
        outcomes = [runner(spec) for spec in specs]

    mismatches = []
    for outcome in sorted(outcomes, key=lambda o: o.spec.index):
        if not outcome.failed_checks:
            continue
        spec = outcome.spec
        logger.error(f"❌ Trial {spec.index} failed: {', '.join(outcome.failed_checks)}")
        mismatches.append(MismatchRecord(
            trial=spec.index,
            seed=spec.seed,
            dims=(spec.m, spec.n, spec.p),
            width=spec.w,
            failed_checks=list(outcome.failed_checks),
            reproducer=_dump_reproducer(spec, fault, reproducer_dir) if not mismatches else None,
        ))

    summary = VerifySummary(
        config={
            "trials": trials,
            "max_dim": max_dim,
            "widths": list(widths),
            "seed": seed,
            "large_trials": large_trials,
            "large_dim": large_dim,
            "large_width": large_width,
            "fault": fault,
        },
        trials=len(specs),
        passed=len(specs) - len(mismatches),
        failed=len(mismatches),
        mismatches=mismatches,
    )
    if summary.failed:
        logger.error(f"❌ {summary.failed}/{summary.trials} trials failed")
    else:
        logger.info(f"✅ All {summary.trials} trials passed")
    return summary
