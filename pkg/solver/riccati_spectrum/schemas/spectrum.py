# solver/riccati_spectrum/schemas/spectrum.py

from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import Field, model_validator

from ..core.config import settings
from .chain import BlowupChain, ChainOptions
from .coefficients import Envelopes
from .common import FrozenModel


class RootKindName(str, Enum):
    CHAIN_TIME = "chain_time"
    DEFECT = "defect"


class RootKind(FrozenModel):
    """Which function of lambda is solved for zero: t_j(lambda) or the defect at t = 0."""

    kind: RootKindName
    j: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_index(self) -> "RootKind":
        if (self.kind == RootKindName.CHAIN_TIME) != (self.j is not None):
            raise ValueError("chain_time roots need j; defect roots take none.")
        return self

    @classmethod
    def chain_time(cls, j: int) -> "RootKind":
        return cls(kind=RootKindName.CHAIN_TIME, j=j)

    @classmethod
    def defect(cls) -> "RootKind":
        return cls(kind=RootKindName.DEFECT)

    def __str__(self) -> str:
        return f"chain_time({self.j})" if self.kind == RootKindName.CHAIN_TIME else "defect"


class Bracket(FrozenModel):
    lo: float
    hi: float
    root_kind: RootKind
    f_lo: Optional[float] = Field(None, description="None: below zero (chain stopped before j)")
    f_hi: Optional[float] = None

    @model_validator(mode="after")
    def ordered(self) -> "Bracket":
        if self.lo > self.hi:
            raise ValueError(f"Bracket lo={self.lo} exceeds hi={self.hi}.")
        return self


class ScanOptions(FrozenModel):
    chain: ChainOptions = Field(default_factory=ChainOptions)
    ratio: float = Field(default_factory=lambda: settings.SCAN_RATIO, gt=1)
    n_scan: Optional[int] = Field(None, ge=2, description="Point count; overrides ratio")
    refine_levels: int = Field(default_factory=lambda: settings.SCAN_REFINE_LEVELS, ge=0)
    tol: float = Field(default_factory=lambda: settings.EIGEN_TOL, gt=0)
    dedup_rel_tol: float = Field(default_factory=lambda: settings.DEDUP_REL_TOL, gt=0)
    threads: int = Field(default_factory=lambda: settings.RICCATI_SPECTRUM_THREADS, ge=1)
    grid_n: int = Field(default_factory=lambda: settings.GRID_N, ge=2)


class Eigenvalue(FrozenModel):
    order_index: int = Field(..., ge=1)
    lam: float = Field(..., alias="lambda")
    bracket: Tuple[float, float]
    defect_residual: float = Field(..., description="Defect of the final chain at t = 0")
    root_residual: float = Field(0.0, description="Root function value at lambda")
    chain: BlowupChain
    method: Literal["chain_root", "defect_root"]
    root_kind: RootKind

    @model_validator(mode="after")
    def inside_bracket(self) -> "Eigenvalue":
        lo, hi = self.bracket
        if not lo <= self.lam <= hi:
            raise ValueError(f"lambda={self.lam} lies outside its bracket ({lo}, {hi}).")
        return self


class SpectrumResult(FrozenModel):
    lambda_b: float
    lambda_min: float
    lambda_max: float
    eigenvalues: List[Eigenvalue] = Field(default_factory=list)
    below_lambda_b: Literal["NONE", "UNKNOWN"] = "UNKNOWN"

    @property
    def values(self) -> List[float]:
        return [e.lam for e in self.eigenvalues]


class GrowthReport(FrozenModel):
    ratios: List[Tuple[int, float]]
    tail_min: float
    tail_max: float


class PeriodBounds(FrozenModel):
    m: int = Field(..., ge=1)
    lower: float
    upper: float
    envelopes_used: Envelopes
    H_under_22: float
    ordered: bool


class PeriodClass(str, Enum):
    GREATER_THAN_M = "greater_than_m"
    LESS_THAN_M = "less_than_m"
    INCONCLUSIVE = "inconclusive"
