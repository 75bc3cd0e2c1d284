# solver/riccati_spectrum/schemas/coefficients.py

from functools import cached_property
from typing import Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator

from ..core.config import settings
from ..utils.piecewise import PiecewisePolynomial
from .common import FrozenModel

COEFFICIENT_NAMES: Tuple[str, ...] = (
    "H11",
    "H12",
    "H13",
    "H21",
    "H22",
    "H23",
    "H31",
    "H32",
    "H33",
    "h22",
)


class CoefficientFn(FrozenModel):
    """One time-dependent coefficient on [0, T]."""

    kind: Literal["constant", "pwlinear", "pwpoly", "table"]
    knots: List[float] = Field(..., min_length=2, description="0 = t_0 < ... < t_K = T")
    values: Optional[List[float]] = Field(
        None, description="constant: [c]; pwlinear/table: one value per knot"
    )
    coeffs: Optional[List[List[float]]] = Field(
        None,
        description="pwpoly: per piece, coefficients in (t - knot_i), highest degree first",
    )
    order: Optional[int] = Field(None, ge=1, le=5, description="table spline order")
    kinks: Optional[List[float]] = Field(
        None, description="pwpoly: knots where derivatives may jump (default: all)"
    )

    @model_validator(mode="after")
    def check_shape_and_continuity(self) -> "CoefficientFn":
        if self.knots[0] != 0.0:
            raise ValueError(f"First knot must be 0, got {self.knots[0]}.")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("Knots must be strictly increasing.")
        if self.kind == "constant" and (not self.values or len(self.values) != 1):
            raise ValueError("constant needs values=[c].")
        if self.kind in ("pwlinear", "table") and (
            self.values is None or len(self.values) != len(self.knots)
        ):
            raise ValueError(f"{self.kind} needs one value per knot.")
        if self.kind == "table" and self.order is None:
            raise ValueError("table needs an interpolation order.")
        if self.kind == "pwpoly":
            if self.coeffs is None or len(self.coeffs) != len(self.knots) - 1:
                raise ValueError("pwpoly needs one coefficient list per piece.")
            worst = float(np.max(self.poly.continuity_defects(), initial=0.0))
            if worst > settings.CONTINUITY_RTOL:
                raise ValueError(
                    f"pwpoly is discontinuous at an interior knot (relative jump {worst:.3e})."
                )
        return self

    @cached_property
    def poly(self) -> PiecewisePolynomial:
        if self.kind == "constant":
            return PiecewisePolynomial.constant(self.values[0], self.knots[-1])
        if self.kind == "pwlinear":
            return PiecewisePolynomial.linear_interpolant(self.knots, self.values)
        if self.kind == "table":
            return PiecewisePolynomial.interpolating_spline(
                self.knots, self.values, self.order
            )
        width = max(len(c) for c in self.coeffs)
        matrix = np.zeros((width, len(self.coeffs)))
        for i, c in enumerate(self.coeffs):
            matrix[width - len(c) :, i] = c
        return PiecewisePolynomial(self.knots, matrix, kinks=self.kinks)

    @property
    def T(self) -> float:
        return self.knots[-1]

    def __call__(self, t: float) -> float:
        return self.poly(t)

    def evaluate(self, t) -> np.ndarray:
        return self.poly.evaluate(t)

    # --- Builders ---
    @classmethod
    def constant(cls, value: float, T: float) -> "CoefficientFn":
        return cls(kind="constant", knots=[0.0, float(T)], values=[float(value)])

    @classmethod
    def pwlinear(cls, knots, values) -> "CoefficientFn":
        return cls(
            kind="pwlinear",
            knots=[float(k) for k in knots],
            values=[float(v) for v in values],
        )

    @classmethod
    def from_poly(cls, poly: PiecewisePolynomial) -> "CoefficientFn":
        if poly.constant_value is not None:
            return cls.constant(poly.constant_value, poly.T)
        return cls(
            kind="pwpoly",
            knots=poly.knots.tolist(),
            coeffs=[poly.coeffs[:, i].tolist() for i in range(poly.coeffs.shape[1])],
            kinks=list(poly.kinks),
        )

    @classmethod
    def from_callable(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        T: float,
        n: Optional[int] = None,
        order: int = 3,
    ) -> "CoefficientFn":
        """Tabulates ``fn`` on a uniform grid and interpolates it with a spline."""
        grid = np.linspace(0.0, T, n or settings.TABULATION_POINTS)
        return cls(
            kind="table",
            knots=grid.tolist(),
            values=np.asarray(fn(grid), dtype=float).tolist(),
            order=order,
        )


class ReducedCoefficients:
    """a = 2H21 + H13^2, b = H11, q0 = H22 - H33 H13^2 and h22, ready for the Riccati RHS."""

    __slots__ = ("a", "b", "q0", "h22", "kinks", "T")

    def __init__(self, a, b, q0, h22, T):
        self.a = a
        self.b = b
        self.q0 = q0
        self.h22 = h22
        self.T = T
        kinks = set()
        for p in (a, b, q0, h22):
            kinks.update(p.kinks)
        self.kinks = tuple(sorted(kinks))

    def q(self, lam: float, t: float) -> float:
        return self.q0(t) - lam * self.h22(t)


class CoefficientSet(FrozenModel):
    """The ten coefficients of the Hamiltonian system plus the horizon T."""

    T: float = Field(..., gt=0, description="Horizon (seconds)")
    H11: CoefficientFn
    H12: CoefficientFn
    H13: CoefficientFn
    H21: CoefficientFn
    H22: CoefficientFn
    H23: CoefficientFn
    H31: CoefficientFn
    H32: CoefficientFn
    H33: CoefficientFn
    h22: CoefficientFn

    @model_validator(mode="after")
    def check_horizon(self) -> "CoefficientSet":
        slack = 1e-12 * max(1.0, self.T)
        for name in COEFFICIENT_NAMES:
            fn = getattr(self, name)
            if abs(fn.T - self.T) > slack:
                raise ValueError(f"{name} covers [0, {fn.T}] but T = {self.T}.")
        return self

    @classmethod
    def constant(cls, T: float, **values: float) -> "CoefficientSet":
        """Constant set; unspecified coefficients are 0 (h22 defaults to -1)."""
        unknown = set(values) - set(COEFFICIENT_NAMES)
        if unknown:
            raise ValueError(f"Unknown coefficients: {sorted(unknown)}")
        defaults = {name: 0.0 for name in COEFFICIENT_NAMES}
        defaults["h22"] = -1.0
        defaults.update(values)
        return cls(
            T=T, **{k: CoefficientFn.constant(v, T) for k, v in defaults.items()}
        )

    def functions(self) -> Dict[str, CoefficientFn]:
        return {name: getattr(self, name) for name in COEFFICIENT_NAMES}

    def replace(self, **fns: CoefficientFn) -> "CoefficientSet":
        # model_copy would keep the cached `reduced`
        return type(self)(T=self.T, **{**self.functions(), **fns})

    @cached_property
    def reduced(self) -> ReducedCoefficients:
        H13 = self.H13.poly
        H13_sq = H13 * H13
        a = self.H21.poly * 2.0 + H13_sq
        q0 = self.H22.poly - self.H33.poly * H13_sq
        return ReducedCoefficients(a, self.H11.poly, q0, self.h22.poly, self.T)

    @property
    def kinks(self) -> Tuple[float, ...]:
        return self.reduced.kinks

    def validation_grid(self, grid_n: int) -> np.ndarray:
        """Uniform grid with grid_n intervals, plus every knot of every coefficient."""
        grid = np.linspace(0.0, self.T, max(int(grid_n), 1) + 1)
        knots = np.concatenate([np.asarray(fn.knots) for fn in self.functions().values()])
        return np.unique(np.concatenate([grid, np.clip(knots, 0.0, self.T)]))


class Violation(FrozenModel):
    time: float
    constraint: str
    magnitude: float


class EnvelopePair(FrozenModel):
    lower: float = Field(..., description="check mark: constant strictly below")
    upper: float = Field(..., description="hat mark: constant strictly above")


class Envelopes(FrozenModel):
    H11: EnvelopePair
    H12: EnvelopePair
    H13_abs: EnvelopePair
    H21: EnvelopePair
    H22: EnvelopePair
    H31: EnvelopePair
    H32: EnvelopePair
    H33: EnvelopePair
    h22: EnvelopePair
    grid_size: int

    @property
    def H23_hat(self) -> float:
        return -self.H33.lower * self.H13_abs.upper

    @property
    def H23_check(self) -> float:
        return -self.H33.upper * self.H13_abs.lower


class ValidationReport(FrozenModel):
    beta: float = Field(..., ge=0)
    lambda_b: float
    structural_ok: bool
    all_eigen_condition_ok: bool
    grid_size: int
    violations: List[Violation] = Field(default_factory=list)
    symmetry_warnings: List[Violation] = Field(default_factory=list)
    uniqueness_constant: float
    below_lambda_b: Literal["NONE", "UNKNOWN"] = "UNKNOWN"
    norm_method: Literal["grid"] = "grid"

    @model_validator(mode="after")
    def structural_iff_clean(self) -> "ValidationReport":
        if self.structural_ok != (not self.violations):
            raise ValueError("structural_ok must be true exactly when violations is empty.")
        return self
