"""
Роутер модели задержки
"""
import logging
from fastapi import APIRouter, HTTPException, Query

from app.config import get_settings
from app.models.schemas import LatencyBreakdown, ProblemPayload, Variant
from app.services import latency_service
from app.services.matrix_io import payload_to_problem

logger = logging.getLogger(__name__)

router = APIRouter(prefix=get_settings().API_PREFIX, tags=["Latency"])


@router.get("/latency/worst-case", summary="Худшая задержка по формуле")
async def worst_case(
    n: int = Query(..., ge=1, description="Общая размерность N"),
    w: int = Query(..., ge=2, description="Разрядность входов"),
    variant: Variant = Query(Variant.SERIAL),
):
    try:
        cycles = latency_service.worst_case_latency(n, w, variant)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {"n": n, "w": w, "variant": variant, "cycles": cycles}


@router.post(
    "/latency",
    response_model=LatencyBreakdown,
    summary="Задержка задачи по шагам",
    description="Аналитическая разбивка: L_i = C_i * max(R_i, 1), суммы для serial и parallel",
)
async def problem_latency(problem: ProblemPayload):
    try:
        return latency_service.analytic_latency(payload_to_problem(problem))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
