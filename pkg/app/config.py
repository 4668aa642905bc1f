# app/config.py
from __future__ import annotations
import logging
import os
from functools import lru_cache
from typing import Any

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationInfo, field_validator

load_dotenv()  # optional .env next to the working directory

logger = logging.getLogger(__name__)

# compiled caps; settings may lower them, never raise them
HARD_MAX_FORM_DIM = 12
HARD_MAX_SCAN_N = 4
HARD_MAX_SOLVER_N = 6
HARD_MAX_GL_N = 4

_CAPS = {
    "max_form_dim": HARD_MAX_FORM_DIM,
    "max_scan_n": HARD_MAX_SCAN_N,
    "max_solver_n": HARD_MAX_SOLVER_N,
}
_ENV_NAMES = {
    "max_form_dim": "FS2_MAX_FORM_DIM",
    "max_scan_n": "FS2_MAX_SCAN_N",
    "max_solver_n": "FS2_MAX_SOLVER_N",
}


class Settings(BaseModel):
    log_level: str = "WARNING"
    max_form_dim: int = HARD_MAX_FORM_DIM
    max_scan_n: int = HARD_MAX_SCAN_N
    max_solver_n: int = HARD_MAX_SOLVER_N

    @field_validator("max_form_dim", "max_scan_n", "max_solver_n", mode="before")
    @classmethod
    def _within_cap(cls, value: Any, info: ValidationInfo) -> int:
        """Unusable values fall back to the compiled cap with a warning."""
        cap = _CAPS[info.field_name]
        name = _ENV_NAMES[info.field_name]
        try:
            number = int(value)
        except (TypeError, ValueError):
            logger.warning("%s=%r is not an integer; using %d", name, value, cap)
            return cap
        if number < 0:
            logger.warning("%s=%d is negative; using %d", name, number, cap)
            return cap
        if number > cap:
            logger.warning("%s=%d exceeds the compiled cap %d; using %d", name, number, cap, cap)
            return cap
        return number

    @classmethod
    def from_env(cls) -> "Settings":
        caps = {field: os.environ[name] for field, name in _ENV_NAMES.items() if name in os.environ}
        return cls(log_level=os.environ.get("FS2_LOG_LEVEL", "WARNING").upper(), **caps)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
