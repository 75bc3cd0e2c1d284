# solver/riccati_spectrum/schemas/chain.py

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import Field

from ..core.config import settings
from .common import Equation, FrozenModel, Representation
from .riccati import IntegratorOptions, RiccatiSolution


class ChainTerminationKind(str, Enum):
    CROSSED_ZERO = "crossed_zero"
    DEFECT_AT_ZERO = "defect_at_zero"
    ZERO_RETURN_AT_INTERIOR = "zero_return_at_interior"
    DEPTH_EXCEEDED = "depth_exceeded"


class ChainTermination(FrozenModel):
    kind: ChainTerminationKind
    j: Optional[int] = Field(None, description="crossed_zero: index of the breakpoint at or below 0")
    t_j: Optional[float] = None
    defect: Optional[float] = Field(None, description="defect_at_zero: dual value at t = 0")
    repr: Optional[Representation] = None
    t_star: Optional[float] = Field(None, description="zero_return_at_interior: return time")


class ChainOptions(FrozenModel):
    integrator: IntegratorOptions = Field(default_factory=IntegratorOptions)
    max_depth: int = Field(default_factory=lambda: settings.MAX_DEPTH, ge=1)
    zero_slack: float = Field(default_factory=lambda: settings.BREAKPOINT_ZERO_SLACK, ge=0)

    def with_slack(self, zero_slack: float) -> "ChainOptions":
        return self.model_copy(update={"zero_slack": zero_slack})


class BlowupChain(FrozenModel):
    """
    Breakpoints T = t_0 > t_1 > ... of alternating primal/dual Riccati segments.

    ``breakpoints`` also holds the last raw blow-up time, so a chain that
    crossed zero ends with a breakpoint at or below 0.
    """

    lam: float = Field(..., alias="lambda")
    T: float
    breakpoints: List[float]
    segment_kinds: List[Equation] = Field(..., alias="kinds")
    termination: ChainTermination
    offset_n: Optional[int] = None
    value_at_zero: Optional[float] = Field(
        None, description="Continued dual-representation value at t = 0 of the segment covering 0"
    )
    segments: Tuple[RiccatiSolution, ...] = Field(default=(), exclude=True, repr=False)

    @property
    def depth(self) -> int:
        return len(self.segment_kinds)

    @property
    def last_kind(self) -> Equation:
        return self.segment_kinds[-1]

    @property
    def defect_structure(self) -> Tuple[int, Equation]:
        return self.depth, self.last_kind

    def reaches(self, j: int) -> bool:
        """Breakpoint j exists and every earlier interior breakpoint is positive."""
        return len(self.breakpoints) > j and all(t > 0 for t in self.breakpoints[1:j])

    def is_eigen(self, tol: float) -> bool:
        term = self.termination
        return (
            term.kind == ChainTerminationKind.DEFECT_AT_ZERO
            and term.defect is not None
            and abs(term.defect) <= tol
        )
