# solver/riccati_spectrum/utils/piecewise.py

import logging
from bisect import bisect_right
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PPoly, make_interp_spline

from ..core.exceptions import InvalidCoefficientFunction, TimeOutOfRange

logger = logging.getLogger(__name__)

_END_SLACK_REL = 1e-12


class PiecewisePolynomial:
    """
    Continuous piecewise polynomial on ``knots[0] = 0 < ... < knots[-1] = T``.

    ``coeffs`` has shape (degree + 1, n_pieces); column i holds the coefficients
    of piece i in the local variable (t - knots[i]), highest degree first (the
    layout of ``scipy.interpolate.PPoly``). Times below the first knot evaluate
    at the first knot; times above the last knot raise ``TimeOutOfRange``.

    ``kinks`` lists the interior knots where a derivative may jump; integrators
    restart there.
    """

    __slots__ = (
        "knots",
        "coeffs",
        "kinks",
        "_knots_list",
        "_coeff_lists",
        "_t0",
        "_t_end",
        "_slack",
        "_const",
    )

    def __init__(
        self,
        knots: Sequence[float],
        coeffs: np.ndarray,
        kinks: Optional[Iterable[float]] = None,
    ):
        knots_arr = np.asarray(knots, dtype=float)
        coeffs_arr = np.atleast_2d(np.asarray(coeffs, dtype=float))
        if knots_arr.ndim != 1 or knots_arr.size < 2:
            raise InvalidCoefficientFunction("At least two knots are required.")
        if not np.all(np.diff(knots_arr) > 0):
            raise InvalidCoefficientFunction("Knots must be strictly increasing.")
        if coeffs_arr.shape[1] != knots_arr.size - 1:
            raise InvalidCoefficientFunction(
                f"Expected {knots_arr.size - 1} pieces, got {coeffs_arr.shape[1]}."
            )
        if not np.all(np.isfinite(coeffs_arr)):
            raise InvalidCoefficientFunction("Coefficients must be finite.")

        self.knots = knots_arr
        self.coeffs = coeffs_arr
        if kinks is None:
            kinks = knots_arr[1:-1]
        self.kinks: Tuple[float, ...] = tuple(
            sorted(float(k) for k in kinks if knots_arr[0] < k < knots_arr[-1])
        )
        self._knots_list = knots_arr.tolist()
        self._coeff_lists = [coeffs_arr[:, i].tolist() for i in range(coeffs_arr.shape[1])]
        self._t0 = float(knots_arr[0])
        self._t_end = float(knots_arr[-1])
        self._slack = _END_SLACK_REL * max(1.0, abs(self._t_end))
        degree_zero = np.all(coeffs_arr[:-1] == 0.0) if coeffs_arr.shape[0] > 1 else True
        self._const = (
            float(coeffs_arr[-1, 0])
            if degree_zero and np.all(coeffs_arr[-1] == coeffs_arr[-1, 0])
            else None
        )

    # --- Construction helpers ---
    @classmethod
    def constant(cls, value: float, T: float) -> "PiecewisePolynomial":
        return cls([0.0, T], np.array([[float(value)]]), kinks=())

    @classmethod
    def linear_interpolant(
        cls, knots: Sequence[float], values: Sequence[float]
    ) -> "PiecewisePolynomial":
        knots_arr = np.asarray(knots, dtype=float)
        values_arr = np.asarray(values, dtype=float)
        if values_arr.shape != knots_arr.shape:
            raise InvalidCoefficientFunction("pwlinear needs one value per knot.")
        slopes = np.diff(values_arr) / np.diff(knots_arr)
        return cls(knots_arr, np.vstack([slopes, values_arr[:-1]]))

    @classmethod
    def from_ppoly(cls, pp: PPoly, smooth: bool = False) -> "PiecewisePolynomial":
        """Drops the zero-length intervals PPoly.from_spline leaves at repeated knots."""
        x = np.asarray(pp.x, dtype=float)
        keep = np.diff(x) > 0
        knots = np.concatenate([x[:-1][keep], [x[-1]]])
        return cls(knots, pp.c[:, keep], kinks=() if smooth else None)

    @classmethod
    def interpolating_spline(
        cls, knots: Sequence[float], values: Sequence[float], order: int
    ) -> "PiecewisePolynomial":
        knots_arr = np.asarray(knots, dtype=float)
        if not 1 <= order <= 5:
            raise InvalidCoefficientFunction(f"Table order must be in 1..5, got {order}.")
        if knots_arr.size < order + 1:
            raise InvalidCoefficientFunction(
                f"Table of order {order} needs at least {order + 1} knots."
            )
        spline = make_interp_spline(knots_arr, np.asarray(values, dtype=float), k=order)
        pp = PPoly.from_spline(spline)
        return cls.from_ppoly(pp, smooth=order >= 2)

    @classmethod
    def from_callable(
        cls, fn: Callable[[np.ndarray], np.ndarray], T: float, n: int, order: int = 3
    ) -> "PiecewisePolynomial":
        grid = np.linspace(0.0, T, n)
        return cls.interpolating_spline(grid, np.asarray(fn(grid), dtype=float), order)

    # --- Evaluation ---
    @property
    def T(self) -> float:
        return self._t_end

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def constant_value(self) -> Optional[float]:
        return self._const

    def __call__(self, t: float) -> float:
        if t > self._t_end:
            if t > self._t_end + self._slack:
                raise TimeOutOfRange(f"t={t} is beyond the horizon T={self._t_end}.")
            t = self._t_end
        if self._const is not None:
            return self._const
        if t < self._t0:
            t = self._t0
        i = bisect_right(self._knots_list, t) - 1
        if i >= len(self._coeff_lists):
            i = len(self._coeff_lists) - 1
        s = t - self._knots_list[i]
        acc = 0.0
        for c in self._coeff_lists[i]:
            acc = acc * s + c
        return acc

    def evaluate(self, t) -> np.ndarray:
        ts = np.asarray(t, dtype=float)
        if ts.size and np.max(ts) > self._t_end + self._slack:
            raise TimeOutOfRange(
                f"t={float(np.max(ts))} is beyond the horizon T={self._t_end}."
            )
        ts = np.clip(ts, self._t0, self._t_end)
        if self._const is not None:
            return np.full(ts.shape, self._const)
        idx = np.clip(
            np.searchsorted(self.knots, ts, side="right") - 1, 0, self.coeffs.shape[1] - 1
        )
        s = ts - self.knots[idx]
        acc = np.zeros_like(ts)
        for row in self.coeffs:
            acc = acc * s + row[idx]
        return acc

    def continuity_defects(self) -> np.ndarray:
        """|left limit - right value| / max(1, |value|) at each interior knot."""
        if self.coeffs.shape[1] < 2:
            return np.zeros(0)
        widths = np.diff(self.knots)[:-1]
        left = np.zeros(widths.shape)
        for row in self.coeffs[:, :-1]:
            left = left * widths + row
        right = self.coeffs[-1, 1:]
        return np.abs(left - right) / np.maximum(1.0, np.abs(right))

    # --- Arithmetic on the union of knots ---
    def on_knots(self, new_knots: np.ndarray) -> np.ndarray:
        """Re-expands every piece about the left end of each interval of ``new_knots``."""
        new_knots = np.asarray(new_knots, dtype=float)
        degree = self.degree
        out = np.zeros((degree + 1, new_knots.size - 1))
        for j, u in enumerate(new_knots[:-1]):
            i = min(
                max(int(np.searchsorted(self.knots, u, side="right")) - 1, 0),
                self.coeffs.shape[1] - 1,
            )
            shifted = np.poly1d(self.coeffs[:, i])(np.poly1d([1.0, u - self.knots[i]]))
            c = np.atleast_1d(shifted.coeffs)
            out[degree + 1 - c.size :, j] = c
        return out

    def _check_horizon(self, other: "PiecewisePolynomial") -> None:
        if abs(self._t_end - other._t_end) > self._slack:
            raise InvalidCoefficientFunction(
                f"Horizon mismatch: {self._t_end} vs {other._t_end}."
            )

    def _union(self, other: "PiecewisePolynomial") -> Tuple[np.ndarray, Tuple[float, ...]]:
        self._check_horizon(other)
        knots = np.union1d(self.knots, other.knots)
        # merge knots closer than the horizon slack
        keep = np.concatenate([[True], np.diff(knots) > self._slack])
        knots = knots[keep]
        knots[-1] = self._t_end
        return knots, tuple(sorted(set(self.kinks) | set(other.kinks)))

    def __mul__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            return self.scale(float(other))
        if self._const is not None and other._const is not None:
            return PiecewisePolynomial.constant(self._const * other._const, self._t_end)
        knots, kinks = self._union(other)
        a = self.on_knots(knots)
        b = other.on_knots(knots)
        pieces = [np.polymul(a[:, j], b[:, j]) for j in range(knots.size - 1)]
        width = max(p.size for p in pieces)
        out = np.zeros((width, knots.size - 1))
        for j, p in enumerate(pieces):
            out[width - p.size :, j] = p
        return PiecewisePolynomial(knots, out, kinks=kinks)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            other = PiecewisePolynomial.constant(float(other), self._t_end)
        if self._const is not None and other._const is not None:
            return PiecewisePolynomial.constant(self._const + other._const, self._t_end)
        knots, kinks = self._union(other)
        a = self.on_knots(knots)
        b = other.on_knots(knots)
        width = max(a.shape[0], b.shape[0])
        out = np.zeros((width, knots.size - 1))
        out[width - a.shape[0] :] += a
        out[width - b.shape[0] :] += b
        return PiecewisePolynomial(knots, out, kinks=kinks)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PiecewisePolynomial) else -float(other))

    def scale(self, factor: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.knots, self.coeffs * factor, kinks=self.kinks)

    def reciprocal(self, samples_per_piece: int = 8) -> "PiecewisePolynomial":
        """
        1/f. Exact for constants; otherwise a cubic spline through 1/f, fitted
        separately on every kink-free stretch so kinks stay sharp.
        """
        if self._const is not None:
            if self._const == 0.0:
                raise InvalidCoefficientFunction("Cannot invert the zero function.")
            return PiecewisePolynomial.constant(1.0 / self._const, self._t_end)

        edges = [self._t0, *self.kinks, self._t_end]
        all_knots, all_coeffs = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            inside = self.knots[(self.knots > lo) & (self.knots < hi)]
            n = max(16, samples_per_piece * (inside.size + 1))
            grid = np.linspace(lo, hi, n)
            values = self.evaluate(grid)
            if np.any(values == 0.0):
                raise InvalidCoefficientFunction("Cannot invert a function with a zero.")
            spline = make_interp_spline(grid, 1.0 / values, k=3)
            pp = PiecewisePolynomial.from_ppoly(PPoly.from_spline(spline), smooth=True)
            all_knots.append(pp.knots[:-1])
            all_coeffs.append(pp.coeffs)
        knots = np.concatenate(all_knots + [[self._t_end]])
        width = max(c.shape[0] for c in all_coeffs)
        coeffs = np.hstack(
            [np.vstack([np.zeros((width - c.shape[0], c.shape[1])), c]) for c in all_coeffs]
        )
        return PiecewisePolynomial(knots, coeffs, kinks=self.kinks)

    def extrema_on(self, grid: np.ndarray) -> Tuple[float, float]:
        values = self.evaluate(grid)
        return float(np.min(values)), float(np.max(values))
