"""
Конфигурация приложения
"""
from typing import Optional
from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    """Настройки симулятора и сервиса"""

    # Project
    PROJECT_NAME: str = "tugemm"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Воспроизводимость: seed по умолчанию, если не задан --seed/--input
    TUGEMM_SEED: Optional[int] = None

    # Движок симуляции: cycle | event | auto
    SIM_ENGINE: str = "auto"

    # Параллелизм
    VERIFY_WORKERS: int = 1
    PROFILE_WORKERS: int = 4

    # Куда складывать минимизированные контрпримеры verify
    REPRODUCER_DIR: str = "reproducers"

    # Границы допустимых задач
    MAX_INNER_DIM: int = 4096
    MAX_WIDTH: int = 16

    # HTTP
    API_PREFIX: str = "/api/tugemm"
    HOST: str = "0.0.0.0"
    PORT: int = 8000

    class Config:
        env_file = ".env"
        extra = "allow"


@lru_cache()
def get_settings() -> Settings:
    """Получить настройки (с кэшированием)"""
    return Settings()
