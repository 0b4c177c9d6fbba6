"""
Роутер профилирования рабочей нагрузки.

Принимает дампы .tugw и файлы задач, возвращает гистограмму максимумов
и оценку средней задержки.
"""
import logging
from typing import List
from fastapi import APIRouter, HTTPException, Query, UploadFile, File

from app.config import get_settings
from app.models.schemas import ProfileResponse, Variant
from app.services import profiler_service

logger = logging.getLogger(__name__)

router = APIRouter(prefix=get_settings().API_PREFIX, tags=["Profile"])

MAX_FILES_PER_UPLOAD = 256


@router.post(
    "/profile",
    response_model=ProfileResponse,
    summary="Профиль максимумов и средняя задержка",
    description="""
    Загрузка тензоров рабочей нагрузки.

    **Форматы:** .tugw (бинарный дамп), текстовый или JSON-формат задачи
    (в последнем случае операциями считаются A и B).
    """
)
async def profile(
    files: List[UploadFile] = File(..., description="Дампы тензоров"),
    w: int = Query(8, ge=2),
    n: int = Query(16, ge=1),
    variant: Variant = Query(Variant.SERIAL),
):
    logger.info(f"📤 Profile upload: {len(files)} files, w={w}, n={n}")
    if len(files) > MAX_FILES_PER_UPLOAD:
        raise HTTPException(status_code=400, detail=f"Максимум {MAX_FILES_PER_UPLOAD} файлов за раз")

    try:
        tensors = []
        for upload in files:
            content = await upload.read()
            tensors.extend(
                tensor for _, tensor in profiler_service.tensors_from_bytes(content, upload.filename)
            )
        stats = profiler_service.profile_maxima(tensors, w)
        summary = profiler_service.estimate_workload_latency(stats, n, variant)
        config = {"files": [upload.filename for upload in files], "w": w, "n": n, "variant": variant.value}
        return ProfileResponse(config=config, stats=stats, summary=summary)

    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"❌ Profile error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))
