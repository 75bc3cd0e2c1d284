# solver/riccati_spectrum/services/riccati_service.py

import logging
import math
from typing import Callable, Optional, Sequence

from ..core.exceptions import DomainError, FloorReached, TimeOutOfRange
from ..schemas.coefficients import CoefficientFn, CoefficientSet
from ..schemas.common import Equation
from ..schemas.riccati import IntegratorOptions, RiccatiSolution, TerminationKind
from ..utils.integrator import ScalarRiccati, Trajectory, as_arrays, integrate_backward

logger = logging.getLogger(__name__)


# --- Right-hand sides ---
def primal_rhs(c: CoefficientSet, lam: float, t: float, k: float) -> float:
    """dk/dt = -[(2H21 + H13^2) k + H11 + (H22 - H33 H13^2 - lam h22) k^2]."""
    red = c.reduced
    return -(red.a(t) * k + red.b(t) + red.q(lam, t) * k * k)


def dual_rhs(c: CoefficientSet, lam: float, t: float, kt: float) -> float:
    """dk̃/dt = (2H21 + H13^2) k̃ + H11 k̃^2 + (H22 - H33 H13^2 - lam h22)."""
    red = c.reduced
    return red.a(t) * kt + red.b(t) * kt * kt + red.q(lam, t)


def _primal_equation(c: CoefficientSet, lam: float) -> ScalarRiccati:
    red = c.reduced
    q0, h22 = red.q0, red.h22
    return ScalarRiccati(red.a, red.b, lambda t: q0(t) - lam * h22(t))


def _dual_equation(c: CoefficientSet, lam: float) -> ScalarRiccati:
    red = c.reduced
    a, b, q0, h22 = red.a, red.b, red.q0, red.h22
    return ScalarRiccati(
        lambda t: -a(t),
        lambda t: lam * h22(t) - q0(t),
        lambda t: -b(t),
    )


def _to_solution(
    trajectory: Trajectory, lam: float, t_bar: float, equation: Equation
) -> RiccatiSolution:
    t, value, reciprocal = as_arrays(trajectory)
    return RiccatiSolution(
        lam=lam,
        t_bar=t_bar,
        equation=equation,
        t=t,
        value=value,
        reciprocal=reciprocal,
        termination=trajectory.termination,
        anomalies=trajectory.anomalies,
        pieces=tuple(trajectory.pieces),
    )


def _check_start(c: CoefficientSet, t_bar: float) -> None:
    if t_bar > c.T + 1e-12 * max(1.0, c.T):
        raise TimeOutOfRange(f"t_bar={t_bar} is beyond the horizon T={c.T}.")


def _run(
    c: CoefficientSet,
    lam: float,
    t_bar: float,
    v0: float,
    opts: Optional[IntegratorOptions],
    t_stop: Optional[float],
    equation: Equation,
    detect_zero_return: bool,
) -> RiccatiSolution:
    opts = opts or IntegratorOptions()
    _check_start(c, t_bar)
    end = t_stop if t_stop is not None else opts.floor_for(c.T)
    eq = _primal_equation(c, lam) if equation == Equation.PRIMAL else _dual_equation(c, lam)
    trajectory = integrate_backward(
        eq,
        t_bar,
        v0,
        end,
        opts,
        kinks=c.kinks,
        detect_zero_return=detect_zero_return and equation == Equation.DUAL,
        flag_downward_zero=equation == Equation.PRIMAL,
        label=f"{equation.value} lambda={lam:.12g} t_bar={t_bar:.12g}",
    )
    solution = _to_solution(trajectory, lam, t_bar, equation)
    if t_stop is None and solution.termination.kind == TerminationKind.REACHED_TIME_LIMIT:
        raise FloorReached(
            f"{equation.value} trajectory from t_bar={t_bar} survived to the floor {end}.",
            solution=solution,
            lam=lam,
        )
    return solution


def integrate_primal(
    c: CoefficientSet,
    lam: float,
    t_bar: float,
    k0: float = 0.0,
    opts: Optional[IntegratorOptions] = None,
    t_stop: Optional[float] = None,
) -> RiccatiSolution:
    """
    Backward primal Riccati trajectory from k(t_bar) = k0.

    Without ``t_stop`` the run continues to the integration floor; surviving
    there raises FloorReached carrying the solution.
    """
    return _run(c, lam, t_bar, k0, opts, t_stop, Equation.PRIMAL, False)


def integrate_dual(
    c: CoefficientSet,
    lam: float,
    t_bar: float,
    kt0: float = 0.0,
    opts: Optional[IntegratorOptions] = None,
    t_stop: Optional[float] = None,
    detect_zero_return: bool = True,
) -> RiccatiSolution:
    return _run(c, lam, t_bar, kt0, opts, t_stop, Equation.DUAL, detect_zero_return)


def integrate_scalar_riccati(
    lin: Callable[[float], float],
    const: Callable[[float], float],
    quad: Callable[[float], float],
    t_bar: float,
    k0: float,
    t_stop: float,
    opts: Optional[IntegratorOptions] = None,
    kinks: Sequence[float] = (),
) -> RiccatiSolution:
    """-K' = lin K + const + quad K^2 from K(t_bar) = k0 down to t_stop."""
    trajectory = integrate_backward(
        ScalarRiccati(lin, const, quad),
        t_bar,
        k0,
        t_stop,
        opts or IntegratorOptions(),
        kinks=kinks,
        label="scalar",
    )
    return _to_solution(trajectory, 0.0, t_bar, Equation.PRIMAL)


# --- Constant-coefficient closed form ---
def _degenerate(a: float, b: float, cq: float) -> bool:
    D = 4.0 * b * cq - a * a
    return abs(D) <= 1e-14 * max(1.0, a * a, abs(4.0 * b * cq))


def closed_form_blowup_time(a: float, b: float, cq: float, t_bar: float) -> Optional[float]:
    """Blow-up time of -k' = a k + b + cq k^2, k(t_bar) = 0, or None if there is none."""
    if cq == 0.0:
        return None
    p0 = a / (2.0 * cq)
    if _degenerate(a, b, cq):
        rate = cq * p0
        return t_bar - 1.0 / rate if rate > 0 else None
    D = 4.0 * b * cq - a * a
    if D > 0:
        omega = math.sqrt(D) / 2.0
        return t_bar - (math.pi / 2.0 - math.atan(a / (2.0 * omega))) / omega
    r = math.sqrt(-D) / (2.0 * abs(cq))
    if p0 + r == 0.0 or p0 - r == 0.0:
        return None
    R0 = (p0 - r) / (p0 + r)
    if R0 <= 0.0:
        return None
    s_star = math.log(1.0 / R0) / (2.0 * cq * r)
    return t_bar - s_star if s_star > 0 else None


def closed_form_constant_riccati(
    a: float, b: float, cq: float, t_bar: float, t: float
) -> float:
    """
    Exact solution of -k' = a k + b + cq k^2 with k(t_bar) = 0.

    Positive discriminant 4 b cq - a^2 gives the tan branch, negative the
    hyperbolic one, zero the rational one; cq = 0 is linear.
    """
    if t > t_bar:
        raise DomainError(f"t={t} lies after t_bar={t_bar}.")
    s = t_bar - t
    if cq == 0.0:
        if a == 0.0:
            return b * s
        return (b / a) * math.expm1(a * s)

    t_star = closed_form_blowup_time(a, b, cq, t_bar)
    if t_star is not None and t <= t_star:
        raise DomainError(f"t={t} is at or past the blow-up time {t_star}.")

    p0 = a / (2.0 * cq)
    if _degenerate(a, b, cq):
        p = p0 / (1.0 - cq * p0 * s)
        return p - p0
    D = 4.0 * b * cq - a * a
    if D > 0:
        omega = math.sqrt(D) / 2.0
        return (omega / cq) * math.tan(omega * s + math.atan(a / (2.0 * omega))) - p0
    r = math.sqrt(-D) / (2.0 * abs(cq))
    if p0 + r == 0.0:
        return 0.0
    R0 = (p0 - r) / (p0 + r)
    R = R0 * math.exp(2.0 * cq * r * s)
    if math.isinf(R):
        return -r - p0
    return r * (1.0 + R) / (1.0 - R) - p0


# --- Dual coefficients ---
def dual_coefficients(c: CoefficientSet, lam: float) -> CoefficientSet:
    """
    Coefficients of the Legendre-dual system, with λ folded into H̃11 and h̃22 = 0.

    Built with exact piecewise-polynomial arithmetic; only 1/H33 is tabulated
    when H33 is not constant.
    """
    H13 = c.H13.poly
    H13_sq = H13 * H13
    H33_inv = c.H33.poly.reciprocal()
    cross = -(H33_inv * H13)
    mixed = -H13_sq - c.H21.poly
    fn = CoefficientFn.from_poly
    return CoefficientSet(
        T=c.T,
        H11=fn(H13_sq * c.H33.poly - c.H22.poly + c.h22.poly.scale(lam)),
        H12=fn(mixed),
        H13=fn(H13),
        H21=fn(mixed),
        H22=fn(H13_sq * H33_inv - c.H11.poly),
        H23=fn(cross),
        H31=fn(H13),
        H32=fn(cross),
        H33=fn(H33_inv),
        h22=CoefficientFn.constant(0.0, c.T),
    )


def f0_bound(k: float, H33: float) -> float:
    """F0(k) = k / (1 - k H33); lies in [0, -1/H33] for k >= 0 and H33 < 0."""
    return k / (1.0 - k * H33)
