# solver/riccati_spectrum/schemas/riccati.py

from enum import Enum
from functools import cached_property
from typing import Any, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator

from ..core.config import settings
from ..core.exceptions import DomainError
from .common import Equation, FrozenModel, Representation


class TerminationKind(str, Enum):
    REACHED_TIME_LIMIT = "reached_time_limit"
    BLOWUP_PLUS_INF = "blowup_plus_inf"
    BLOWUP_MINUS_INF = "blowup_minus_inf"
    ZERO_RETURN = "zero_return"


class TerminationEvent(FrozenModel):
    kind: TerminationKind
    t_star: float = Field(..., description="Event time (or the stop time for reached_time_limit)")
    value: float = Field(0.0, description="Stored value at t_star in the representation below")
    repr: Representation = Representation.DIRECT
    localization_error: float = Field(0.0, ge=0)

    @property
    def is_blowup(self) -> bool:
        return self.kind in (TerminationKind.BLOWUP_PLUS_INF, TerminationKind.BLOWUP_MINUS_INF)


class DensePiece(NamedTuple):
    """One accepted step: interpolant of the stored variable on [t_lo, t_hi]."""

    t_hi: float
    t_lo: float
    interpolant: Any
    reciprocal: bool


class IntegratorOptions(FrozenModel):
    rtol: float = Field(default_factory=lambda: settings.INTEGRATOR_RTOL, gt=0)
    atol: float = Field(default_factory=lambda: settings.INTEGRATOR_ATOL, gt=0)
    switch_threshold: float = Field(default_factory=lambda: settings.SWITCH_THRESHOLD, gt=0)
    switch_back: float = Field(default_factory=lambda: settings.SWITCH_BACK, gt=0)
    floor_horizons: float = Field(default_factory=lambda: settings.FLOOR_HORIZONS, gt=0)
    floor: Optional[float] = Field(
        None, description="Absolute integration floor; overrides floor_horizons"
    )
    root_xtol: float = Field(default_factory=lambda: settings.ROOT_XTOL, gt=0)
    zero_return_deadband: float = Field(
        default_factory=lambda: settings.ZERO_RETURN_DEADBAND, ge=0
    )
    max_step: float = Field(np.inf, gt=0)

    @model_validator(mode="after")
    def check_hysteresis(self) -> "IntegratorOptions":
        if self.switch_back >= self.switch_threshold:
            raise ValueError("switch_back must be below switch_threshold.")
        return self

    def floor_for(self, T: float) -> float:
        return self.floor if self.floor is not None else -self.floor_horizons * T


class RiccatiSolution(FrozenModel):
    """
    Backward trajectory of the primal (k) or dual (k̃) Riccati equation.

    Samples are stored in the representation active at each step: the variable
    itself (direct) or its reciprocal. The reciprocal of either variable solves
    the other equation, so ``primal_value`` and ``dual_value`` can be read from
    any sample.
    """

    lam: float = Field(..., alias="lambda")
    t_bar: float
    equation: Equation
    t: np.ndarray = Field(..., description="Sample times, strictly decreasing")
    value: np.ndarray = Field(..., description="Stored value per sample")
    reciprocal: np.ndarray = Field(..., description="True where the sample holds 1/variable")
    termination: TerminationEvent
    anomalies: List[float] = Field(
        default_factory=list, description="Times of downward zero crossings of the primal"
    )
    pieces: Tuple[DensePiece, ...] = Field(default=(), exclude=True, repr=False)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @cached_property
    def piece_lows(self) -> np.ndarray:
        # ascending copy for searchsorted
        return np.array([p.t_lo for p in reversed(self.pieces)])

    def _raw(self, t: float) -> Tuple[float, bool]:
        if not self.pieces:
            if abs(t - self.t_bar) <= 1e-14 * max(1.0, abs(self.t_bar)):
                return float(self.value[0]), bool(self.reciprocal[0])
            raise DomainError(f"No trajectory around t={t}.")
        slack = 1e-12 * max(1.0, abs(self.t_bar))
        if t > self.t_bar + slack or t < self.t_end - slack:
            raise DomainError(
                f"t={t} is outside the trajectory [{self.t_end}, {self.t_bar}]."
            )
        n = len(self.pieces)
        i = int(np.searchsorted(self.piece_lows, t, side="right")) - 1
        piece = self.pieces[n - 1 - min(max(i, 0), n - 1)]
        t_clamped = min(max(t, piece.t_lo), piece.t_hi)
        return float(piece.interpolant(t_clamped)[0]), piece.reciprocal

    def _map(self, t, own: bool):
        def one(s: float) -> float:
            u, rec = self._raw(float(s))
            if rec != own:
                return u
            return 1.0 / u if u != 0.0 else np.copysign(np.inf, u)

        if np.ndim(t) == 0:
            return one(t)
        return np.array([one(s) for s in np.asarray(t, dtype=float)])

    def value_at(self, t):
        """The equation's own variable (k for primal, k̃ for dual)."""
        return self._map(t, own=True)

    def primal_value(self, t):
        return self._map(t, own=self.equation == Equation.PRIMAL)

    def dual_value(self, t):
        return self._map(t, own=self.equation == Equation.DUAL)

    def samples(self):
        for t, v, rec in zip(self.t, self.value, self.reciprocal):
            yield float(t), float(v), Representation.RECIPROCAL if rec else Representation.DIRECT
