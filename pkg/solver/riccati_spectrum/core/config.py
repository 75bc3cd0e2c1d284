# solver/riccati_spectrum/core/config.py

import logging
from typing import Optional

from pydantic import Field, ValidationInfo, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    PROJECT_NAME: str = "Riccati Spectrum Solver (blow-up chains + Legendre dual)"

    # --- Riccati Integrator ---
    INTEGRATOR_RTOL: float = Field(
        1e-10, description="Relative tolerance of the embedded RK 5(4) stepper"
    )
    INTEGRATOR_ATOL: float = Field(
        1e-12, description="Absolute tolerance of the embedded RK 5(4) stepper"
    )
    SWITCH_THRESHOLD: float = Field(
        1.0, description="|value| at which integration moves to the reciprocal"
    )
    SWITCH_BACK: float = Field(
        0.5, description="|value| below which integration returns to the direct form"
    )
    FLOOR_HORIZONS: float = Field(
        1.0, description="Integration floor, in horizons below t = 0 (floor = -k*T)"
    )
    ROOT_XTOL: float = Field(
        1e-14, description="Absolute time tolerance for event refinement"
    )
    ZERO_RETURN_DEADBAND: float = Field(
        1e-13, description="Dual value must dip below -deadband before a return counts"
    )
    # --- End Riccati Integrator ---

    # --- Coefficients ---
    GRID_N: int = Field(2048, description="Uniform validation grid intervals on [0, T]")
    ENVELOPE_MARGIN_REL: float = Field(
        1e-6, description="Envelope margin relative to max(1, max|f|)"
    )
    STRUCTURAL_TOL: float = Field(
        1e-10, description="Absolute tolerance for H23 = -H33*H13"
    )
    CONTINUITY_RTOL: float = Field(
        1e-12, description="Relative tolerance for continuity at interior knots"
    )
    TABULATION_POINTS: int = Field(
        257, description="Knots used when a coefficient is tabulated from a callable"
    )
    # --- End Coefficients ---

    # --- Chain & Spectrum ---
    MAX_DEPTH: int = Field(256, description="Maximum number of chain segments")
    BREAKPOINT_ZERO_SLACK: float = Field(
        1e-12, description="Extra slack when classifying a breakpoint as t = 0"
    )
    SCAN_RATIO: float = Field(1.15, description="Geometric ratio of the lambda scan")
    SCAN_REFINE_LEVELS: int = Field(
        8, description="Bisection levels between scan points of differing structure"
    )
    EIGEN_TOL: float = Field(1e-8, description="Root tolerance for eigenvalues")
    DEDUP_REL_TOL: float = Field(
        1e-9, description="Eigenvalues closer than this (relative) are merged"
    )
    H_UNDER_MAX_DOUBLINGS: int = Field(
        20, description="Cap on doublings when searching the auxiliary H22"
    )
    RICCATI_SPECTRUM_THREADS: int = Field(
        1, description="Worker threads for lambda scans"
    )
    # --- End Chain & Spectrum ---

    # --- Database Settings ---
    SQLALCHEMY_DATABASE_URI: Optional[str] = Field(
        None, description="Run log database, e.g. sqlite:///./riccati_runs.db"
    )
    # --- End Database Settings ---

    @field_validator(
        "INTEGRATOR_RTOL",
        "INTEGRATOR_ATOL",
        "ROOT_XTOL",
        "EIGEN_TOL",
        "ENVELOPE_MARGIN_REL",
        mode="after",
    )
    def check_tolerances(cls, v: float, info: ValidationInfo) -> float:
        """Rejects non-positive tolerances and warns about loose ones."""
        if v <= 0:
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        if v > 1e-6 and info.field_name != "ENVELOPE_MARGIN_REL":
            logger.warning(
                f"{info.field_name}={v} is loose; oracle and eigenvalue accuracy "
                f"targets may not be met."
            )
        return v

    @field_validator("SWITCH_BACK", mode="after")
    def check_hysteresis(cls, v: float, info: ValidationInfo) -> float:
        threshold = info.data.get("SWITCH_THRESHOLD", 1.0)
        if not 0 < v < threshold:
            raise ValueError(
                f"SWITCH_BACK must lie in (0, SWITCH_THRESHOLD={threshold}), got {v}"
            )
        return v

    @field_validator("RICCATI_SPECTRUM_THREADS", mode="after")
    def check_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"RICCATI_SPECTRUM_THREADS must be at least 1, got {v}")
        if v > 1:
            logger.warning(
                f"RICCATI_SPECTRUM_THREADS={v}: chains run in threads; RK steps hold the GIL."
            )
        return v

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=True, extra="ignore"
    )


# Create the singleton settings instance
settings = Settings()
