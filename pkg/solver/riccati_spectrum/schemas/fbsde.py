# solver/riccati_spectrum/schemas/fbsde.py

from typing import List, Tuple

import numpy as np
from pydantic import Field, model_validator

from .chain import ChainOptions
from .common import Equation, FrozenModel


class SimulationOptions(FrozenModel):
    n_steps: int = Field(2000, ge=1, description="Time steps over [0, T]")
    n_paths: int = Field(16, ge=1)
    seed: int = Field(0, ge=0)
    y0: float = Field(1.0, description="y(0); the eigenfunction is determined up to this scale")
    defect_tol: float = Field(1e-6, gt=0, description="Largest |defect| accepted as an eigen-chain")
    chain: ChainOptions = Field(default_factory=ChainOptions)


class EigenfunctionPath(FrozenModel):
    """
    Monte-Carlo eigenfunction (x, y, z) on a grid over [0, T].

    ``riccati`` holds k on primal intervals and k̃ on dual ones; the owning
    interval of a shared node is the one above it.
    """

    grid: np.ndarray = Field(..., description="Increasing times, shape (n+1,)")
    dt: np.ndarray = Field(..., description="Step sizes, shape (n,)")
    segments: List[Tuple[float, float, Equation]]
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    riccati: np.ndarray
    dB: np.ndarray
    brownian_seed: int
    n_paths: int
    y0: float
    lam: float = Field(..., alias="lambda")

    @model_validator(mode="after")
    def check_shapes(self) -> "EigenfunctionPath":
        n = self.dt.size
        if self.grid.shape != (n + 1,) or self.riccati.shape != (n + 1,):
            raise ValueError("grid and riccati must have one more entry than dt.")
        for name in ("x", "y", "z"):
            if getattr(self, name).shape != (self.n_paths, n + 1):
                raise ValueError(f"{name} must have shape (n_paths, n+1).")
        if self.dB.shape != (self.n_paths, n):
            raise ValueError("dB must have shape (n_paths, n).")
        return self

    def kind_at(self, i: int) -> Equation:
        t = self.grid[i]
        for lo, hi, kind in self.segments:
            if lo <= t < hi:
                return kind
        return self.segments[-1][2]


class ResidualReport(FrozenModel):
    backward_rms: float
    forward_rms: float
    backward_max: float
    forward_max: float
    n_steps: int
    n_paths: int


class PathStatistics(FrozenModel):
    grid: np.ndarray
    x_mean: np.ndarray
    y_mean: np.ndarray
    z_mean: np.ndarray
    x_std: np.ndarray
