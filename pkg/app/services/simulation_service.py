"""
Сервис запуска симуляций и сборки JSON-отчёта.

Используется и командой simulate, и HTTP-роутером.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional

from app.models.schemas import (
    GemmProblem,
    OutputWidthPolicy,
    RunConfig,
    SimResult,
    SimulateReport,
    Variant,
    VariantReport,
)
from app.services import latency_service, oracle_service, trace_service
from app.services.matrix_io import load_problem
from app.services.parallel_service import parallel_run
from app.services.problem_service import hardware_inventory, random_problem, require_valid
from app.services.serial_service import serial_run

logger = logging.getLogger(__name__)


def load_run_problem(cfg: RunConfig) -> GemmProblem:
    if cfg.input_path is not None:
        return load_problem(cfg.input_path)
    return random_problem(cfg.m, cfg.n, cfg.p, cfg.w, cfg.seed)


def trace_path_for(trace: str, variant: Variant, several: bool) -> Path:
    path = Path(trace)
    if not several:
        return path
    return path.with_name(f"{path.stem}.{variant.value}{path.suffix or '.csv'}")


def simulate_problem(
    problem: GemmProblem,
    variants: List[Variant],
    policy: Optional[OutputWidthPolicy] = None,
    engine: Optional[str] = None,
    trace: Optional[str] = None,
) -> Dict[str, SimResult]:
    """Прогнать выбранные варианты; при trace пишется потактовая CSV-трасса"""
    require_valid(problem)
    results = {}
    for variant in variants:
        if trace:
            path = trace_path_for(trace, variant, len(variants) > 1)
            writer = (
                trace_service.write_serial_trace
                if variant == Variant.SERIAL
                else trace_service.write_parallel_trace
            )
            results[variant.value] = writer(path, problem, policy)
        elif variant == Variant.SERIAL:
            results[variant.value] = serial_run(problem, policy, engine)
        else:
            results[variant.value] = parallel_run(problem, policy, engine)
    return results


def build_report(problem: GemmProblem, results: Dict[str, SimResult], config: dict) -> SimulateReport:
    return SimulateReport(
        config=config,
        results={
            name: VariantReport(
                y=result.y.to_rows(),
                cycles=result.cycles,
                activity=result.activity,
                step_cycles=list(result.step_cycles),
                engine=result.engine,
                hardware=hardware_inventory(problem.m, problem.n, problem.p, result.variant),
            )
            for name, result in results.items()
        },
        latency_breakdown=latency_service.analytic_latency(problem),
        max_abs_output=oracle_service.max_abs_output(problem),
    )


def run_config(cfg: RunConfig) -> SimulateReport:
    """Выполнить команду simulate по RunConfig"""
    problem = load_run_problem(cfg)
    results = simulate_problem(problem, cfg.variants, cfg.policy, cfg.engine, cfg.trace)
    config = cfg.model_dump(exclude={"output"})
    config.update({"m": problem.m, "n": problem.n, "p": problem.p, "w": problem.width.w})
    report = build_report(problem, results, config)
    summary = ", ".join(f"{name}={r.cycles}" for name, r in results.items())
    logger.info(f"✅ Simulated {problem.m}x{problem.n}x{problem.p} w={problem.width.w}: {summary} cycles")
    return report
