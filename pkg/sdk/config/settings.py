# sdk/config/settings.py

import logging
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from sdk.utils.logger import init_logging


class Settings(BaseSettings):
    """
    Centralized numeric and runtime settings for the ddcro toolkit.

    Every tolerance used by the solvers, the uncertainty-set checks and the
    master-oracle loop lives here, so a single environment variable (or a
    line in `.env`) changes it everywhere.

    Usage:
      - Import the module-level instance: `from sdk.config.settings import settings`.
      - Override per process with environment variables, e.g. `DDCRO_GAP_TOL=1e-7`.
    """

    model_config = SettingsConfigDict(
        extra="ignore",
        env_file=".env",
        env_file_encoding="utf-8",
    )

    # LP substrate
    FEAS_TOL: float = Field(default=1e-8, alias="DDCRO_FEAS_TOL")
    PHASE1_TOL: float = Field(default=1e-7, alias="DDCRO_PHASE1_TOL")
    PIVOT_TOL: float = Field(default=1e-9, alias="DDCRO_PIVOT_TOL")
    LP_TRACE: Optional[str] = Field(default=None, alias="DDCRO_LP_TRACE")
    """CSV file that receives one tableau dump per pivot when set."""

    # Branch and bound
    INTEGRALITY_TOL: float = Field(default=1e-6, alias="DDCRO_INTEGRALITY_TOL")
    NODE_LIMIT: int = Field(default=20000, alias="DDCRO_NODE_LIMIT")

    # Oracles
    ORACLE_GAP_TOL: float = Field(default=1e-9, alias="DDCRO_ORACLE_GAP_TOL")
    COMPLEMENTARITY_TOL: float = Field(default=1e-6, alias="DDCRO_COMPLEMENTARITY_TOL")
    BIGM_ESCALATIONS: int = Field(default=5, alias="DDCRO_BIGM_ESCALATIONS")
    ORACLE_TRACE: bool = Field(default=False, alias="DDCRO_ORACLE_TRACE")

    # Uncertainty set / CCG
    SINGLETON_TOL: float = Field(default=1e-7, alias="DDCRO_SINGLETON_TOL")
    GAP_TOL: float = Field(default=1e-6, alias="DDCRO_GAP_TOL")
    MAX_ITERATIONS: int = Field(default=200, alias="DDCRO_MAX_ITERATIONS")
    DELTA: float = Field(default=0.10, alias="DDCRO_DELTA")
    POOL_TIMESTAMPS: bool = Field(default=False, alias="DDCRO_POOL_TIMESTAMPS")
    """Stamp cut-pool entries with wall-clock time (breaks byte-identical outputs)."""

    LOG_LEVEL: str = Field(default="INFO", alias="DDCRO_LOG_LEVEL")

    @field_validator(
        "FEAS_TOL",
        "PHASE1_TOL",
        "PIVOT_TOL",
        "INTEGRALITY_TOL",
        "ORACLE_GAP_TOL",
        "COMPLEMENTARITY_TOL",
        "SINGLETON_TOL",
        "GAP_TOL",
        mode="before",
    )
    def validate_tolerance(cls, value):
        """Tolerances must be strictly positive floats."""
        tol = float(value)
        if not tol > 0.0:
            raise ValueError(f"tolerance must be positive, got {value!r}")
        return tol

    @field_validator("LOG_LEVEL", mode="before")
    def validate_log_level(cls, value):
        """Accept any casing of the stdlib level names; fall back to INFO."""
        normalized = str(value).upper().strip()
        if normalized not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            return "INFO"
        return normalized


# Create a single instance of Settings to import elsewhere in the project
settings = Settings()

# ----------------------------------------------------------------------------
# LOGGING CONFIGURATION
# ----------------------------------------------------------------------------
init_logging(settings.LOG_LEVEL)
logger = logging.getLogger("ddcro")
