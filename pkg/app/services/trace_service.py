"""
Потактовые CSV-трассы обоих вариантов.

Векторы счётчиков пишутся в одно поле через пробел.
"""
import csv
import logging
from pathlib import Path
from typing import Optional, Union

from app.models.schemas import GemmProblem, OutputWidthPolicy, SimResult
from app.services.parallel_service import ParallelEngine
from app.services.problem_service import require_valid
from app.services.serial_service import SerialEngine

logger = logging.getLogger(__name__)

SERIAL_TRACE_COLUMNS = ["cycle", "step_index", "col_counters", "row_counters", "enabled_cells", "col_update"]
PARALLEL_TRACE_COLUMNS = ["cycle", "enabled_cells", "contribution_total"]


def _vector(values) -> str:
    return " ".join(str(v) for v in values)


def write_serial_trace(
    path: Union[str, Path],
    problem: GemmProblem,
    policy: Optional[OutputWidthPolicy] = None,
) -> SimResult:
    """Прогнать последовательный вариант потактово, записав трассу"""
    require_valid(problem)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    engine = SerialEngine(problem, policy)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SERIAL_TRACE_COLUMNS)
        for record in engine.cycles():
            writer.writerow([
                record.cycle,
                record.step_index,
                _vector(record.col_counters),
                _vector(record.row_counters),
                record.enabled_cells,
                int(record.col_update),
            ])
    result = engine.result()
    logger.info(f"📝 Serial trace written: {path} ({result.cycles} cycles)")
    return result


def write_parallel_trace(
    path: Union[str, Path],
    problem: GemmProblem,
    policy: Optional[OutputWidthPolicy] = None,
) -> SimResult:
    """Прогнать параллельный вариант потактово, с колонкой col_done на каждый счётчик"""
    require_valid(problem)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    engine = ParallelEngine(problem, policy)
    columns = PARALLEL_TRACE_COLUMNS + [f"col_done_{i}" for i in range(problem.n)]
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for record in engine.cycles():
            writer.writerow(
                [record.cycle, record.enabled_contributions, record.contribution_total]
                + [int(done) for done in record.col_done]
            )
    result = engine.result()
    logger.info(f"📝 Parallel trace written: {path} ({result.cycles} cycles)")
    return result
