"""
Роутер симуляции tuGEMM
"""
import logging
from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool

from app.config import get_settings
from app.errors import ConfigError, OutputOverflowError
from app.models.schemas import OutputWidthPolicy, SimulateReport, SimulateRequest, Variant
from app.services import simulation_service
from app.services.matrix_io import payload_to_problem
from app.services.problem_service import random_problem

logger = logging.getLogger(__name__)

router = APIRouter(prefix=get_settings().API_PREFIX, tags=["Simulate"])


def _simulate(request: SimulateRequest) -> SimulateReport:
    if (request.problem is None) == (request.seed is None):
        raise ConfigError("Нужно указать ровно одно: problem или seed")
    if request.problem is not None:
        problem = payload_to_problem(request.problem)
    else:
        if None in (request.m, request.n, request.p, request.w):
            raise ConfigError("Для генерации по seed нужны m, n, p и w")
        problem = random_problem(request.m, request.n, request.p, request.w, request.seed)

    variants = (
        [Variant.SERIAL, Variant.PARALLEL] if request.variant == "both" else [Variant(request.variant)]
    )
    policy = (
        OutputWidthPolicy.fixed(request.output_bits)
        if request.output_bits is not None
        else OutputWidthPolicy.unbounded()
    )
    results = simulation_service.simulate_problem(problem, variants, policy)
    config = request.model_dump(exclude={"problem"})
    config.update({"m": problem.m, "n": problem.n, "p": problem.p, "w": problem.width.w})
    return simulation_service.build_report(problem, results, config)


@router.post(
    "/simulate",
    response_model=SimulateReport,
    summary="Смоделировать GEMM",
    description="""
    Потактовая модель serial/parallel tuGEMM.

    **Источник задачи:** `problem` в JSON-формате {m, n, p, w, a, b, c}
    либо `seed` с размерами `m`, `n`, `p` и разрядностью `w`.

    `output_bits` включает контроль переполнения выходных регистров.
    """
)
async def simulate(request: SimulateRequest):
    logger.info(f"🧮 Simulate request: variant={request.variant}, seed={request.seed}")

    try:
        return await run_in_threadpool(_simulate, request)
    except OutputOverflowError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"❌ Simulate error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))
