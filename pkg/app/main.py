"""
tuGEMM Simulator API
"""
import logging
from contextlib import asynccontextmanager
from datetime import datetime

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.config import get_settings
from app.routers import simulate_router, latency_router, profile_router
from app.models.schemas import ErrorResponse, HealthResponse

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Управление жизненным циклом приложения"""
    logger.info("🚀 Starting tuGEMM simulator API...")
    logger.info(f"✅ Simulation engine: {settings.SIM_ENGINE}")
    yield
    logger.info("🛑 Shutting down...")


settings = get_settings()

app = FastAPI(
    title="tuGEMM API",
    description="""
    🚀 **tuGEMM Simulator API**: потактовая модель temporal-unary GEMM

    ## Simulate
    - **POST /api/tugemm/simulate** - Смоделировать serial/parallel tuGEMM

    ## Latency
    - **GET /api/tugemm/latency/worst-case** - Худшая задержка N*(2^(w-1))^2
    - **POST /api/tugemm/latency** - Разбивка задержки задачи по шагам

    ## Profile
    - **POST /api/tugemm/profile** - Гистограмма максимумов и средняя задержка
    """,
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Подключаем роутеры
app.include_router(simulate_router)
app.include_router(latency_router)
app.include_router(profile_router)


@app.get("/health", response_model=HealthResponse, tags=["Health"])
async def health_check():
    return HealthResponse(
        status="healthy",
        project=settings.PROJECT_NAME,
        timestamp=datetime.utcnow(),
        engine=settings.SIM_ENGINE
    )


@app.get("/", tags=["Root"])
async def root():
    return {
        "service": "tuGEMM Simulator",
        "version": "1.0.0",
        "engine": settings.SIM_ENGINE,
        "docs": "/docs"
    }


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"❌ Error: {str(exc)}", exc_info=True)
    body = ErrorResponse(error="Internal server error", detail=str(exc), timestamp=datetime.utcnow())
    return JSONResponse(status_code=500, content=body.model_dump(mode="json"))


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host=settings.HOST, port=settings.PORT)
