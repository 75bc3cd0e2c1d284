# solver/riccati_spectrum/schemas/run_config.py

import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import Field, field_validator, model_validator

from .chain import ChainOptions
from .common import FrozenModel
from .fbsde import SimulationOptions
from .riccati import IntegratorOptions
from .spectrum import ScanOptions

CommandName = Literal[
    "validate", "chain", "spectrum", "eigenfunction", "bounds", "classify", "example8", "oracle"
]

_NEEDS_SYSTEM = {"validate", "chain", "spectrum", "eigenfunction", "bounds", "classify"}


class RunConfig(FrozenModel):
    """Options of one CLI run; unset numeric options fall back to the settings defaults."""

    command: CommandName
    config_path: Optional[Path] = None
    system: Optional[str] = None

    lam: Optional[float] = Field(None, alias="lambda")
    lambda_max: Optional[float] = Field(None, gt=0)
    lambda_min: Optional[float] = None
    m: Optional[int] = Field(None, ge=1)
    j: Optional[int] = Field(None, ge=1)

    tol: Optional[float] = Field(None, gt=0)
    rtol: Optional[float] = Field(None, gt=0)
    atol: Optional[float] = Field(None, gt=0)
    switch_threshold: Optional[float] = Field(None, gt=0)
    floor: Optional[float] = None

    paths: Optional[int] = Field(None, ge=1)
    steps: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0)
    y0: float = 1.0
    cases: int = Field(120, ge=0, description="Oracle sweep size")

    out: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"

    @field_validator(
        "lam", "lambda_max", "lambda_min", "tol", "rtol", "atol", "switch_threshold", "floor", "y0"
    )
    def finite(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not math.isfinite(v):
            raise ValueError(f"must be finite, got {v}")
        return v

    @model_validator(mode="after")
    def check_source(self) -> "RunConfig":
        if self.command in _NEEDS_SYSTEM:
            if (self.config_path is None) == (self.system is None):
                raise ValueError(f"{self.command} needs exactly one of --config or --system.")
        return self

    @property
    def system_label(self) -> Optional[str]:
        return str(self.config_path) if self.config_path is not None else self.system

    # --- Option records ---
    def integrator_options(self) -> IntegratorOptions:
        overrides = {
            "rtol": self.rtol,
            "atol": self.atol,
            "switch_threshold": self.switch_threshold,
            "floor": self.floor,
        }
        update = {k: v for k, v in overrides.items() if v is not None}
        if "switch_threshold" in update:
            update["switch_back"] = 0.5 * update["switch_threshold"]
        return IntegratorOptions(**update)

    def chain_options(self) -> ChainOptions:
        return ChainOptions(integrator=self.integrator_options())

    def scan_options(self) -> ScanOptions:
        update = {"chain": self.chain_options()}
        if self.tol is not None:
            update["tol"] = self.tol
        return ScanOptions(**update)

    def simulation_options(self) -> SimulationOptions:
        update = {"chain": self.chain_options(), "seed": self.seed, "y0": self.y0}
        if self.paths is not None:
            update["n_paths"] = self.paths
        if self.steps is not None:
            update["n_steps"] = self.steps
        return SimulationOptions(**update)
