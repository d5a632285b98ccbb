# sphereview/core/config.py

import warnings
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from sphereview.models.enums import Interpolation

load_dotenv()

LOG_LEVEL_NAMES = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SPHEREVIEW_", env_file=".env", extra="ignore"
    )

    PROJECT_NAME: str = "SphereView"
    LOG_LEVEL: str = "INFO"
    JOBS: int = Field(default=1, ge=1, description="Default worker count for --jobs.")
    INTERPOLATION: Interpolation = Interpolation.BILINEAR
    CSV_FLOAT_FORMAT: str = "%.6g"

    # Evaluation constants
    CURVE_WINDOW: int = Field(default=50, ge=1)
    FBETA_BETA2: float = Field(default=0.3, gt=0.0)
    WFM_SIGMA: float = Field(default=5.0, gt=0.0)
    WFM_WINDOW: int = Field(default=7, ge=1)
    SM_ALPHA: float = Field(default=0.5, ge=0.0, le=1.0)
    EVAL_SIZE: Optional[str] = Field(
        default=None, description="WxH evaluation size; None keeps the mask resolution."
    )

    # SAVT
    GATING_REDUCTION: int = Field(default=16, ge=1)
    REMAP_CACHE_SIZE: int = Field(default=64, ge=0)

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def _normalize_log_level(cls, value: object) -> str:
        level = str(value or "INFO").upper()
        if level not in LOG_LEVEL_NAMES:
            warnings.warn(f"Invalid LOG_LEVEL '{level}'. Defaulting to INFO.")
            return "INFO"
        return level


settings = Settings()
