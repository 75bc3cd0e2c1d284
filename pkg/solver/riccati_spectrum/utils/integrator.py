# solver/riccati_spectrum/utils/integrator.py

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from ..core.exceptions import NonFiniteState, StepSizeUnderflow
from ..schemas.common import Representation
from ..schemas.riccati import (
    DensePiece,
    IntegratorOptions,
    TerminationEvent,
    TerminationKind,
)

logger = logging.getLogger(__name__)

ScalarFn = Callable[[float], float]


class ScalarRiccati:
    """
    -v' = lin(t) v + const(t) + quad(t) v^2, integrated backward in time.

    Its reciprocal w = 1/v solves -w' = -lin w - quad - const w^2, so the
    reciprocal equation swaps the roles of ``const`` and ``quad``.
    """

    __slots__ = ("lin", "const", "quad")

    def __init__(self, lin: ScalarFn, const: ScalarFn, quad: ScalarFn):
        self.lin = lin
        self.const = const
        self.quad = quad

    def direct_rhs(self, t: float, y):
        v = y[0]
        return [-(self.lin(t) * v + self.const(t) + self.quad(t) * v * v)]

    def reciprocal_rhs(self, t: float, y):
        w = y[0]
        return [self.lin(t) * w + self.quad(t) + self.const(t) * w * w]


@dataclass
class Trajectory:
    t: List[float]
    value: List[float]
    reciprocal: List[bool]
    pieces: List[DensePiece]
    termination: TerminationEvent
    anomalies: List[float] = field(default_factory=list)


def _locate_root(interpolant, t_lo: float, t_hi: float, xtol: float) -> float:
    """Zero of the step interpolant on [t_lo, t_hi]; secant step if brentq cannot bracket."""

    def f(s: float) -> float:
        return float(interpolant(s)[0])

    f_lo, f_hi = f(t_lo), f(t_hi)
    if f_lo == 0.0:
        return t_lo
    if f_hi == 0.0:
        return t_hi
    try:
        return float(brentq(f, t_lo, t_hi, xtol=xtol))
    except (ValueError, RuntimeError):
        logger.debug(f"brentq could not refine the crossing on [{t_lo}, {t_hi}]; using secant.")
        if f_hi == f_lo:
            return 0.5 * (t_lo + t_hi)
        return min(max(t_hi - f_hi * (t_hi - t_lo) / (f_hi - f_lo), t_lo), t_hi)


def _localization_error(h: float, xtol: float, atol: float, slope: float) -> float:
    if slope == 0.0 or not math.isfinite(slope):
        return abs(h)
    return min(abs(h), xtol + atol / abs(slope))


def _stops(t_bar: float, end: float, kinks: Sequence[float]) -> List[float]:
    inner = {float(k) for k in kinks if end < k < t_bar}
    if end < 0.0 < t_bar:
        # coefficients freeze below 0
        inner.add(0.0)
    return sorted(inner, reverse=True) + [end]


def integrate_backward(
    eq: ScalarRiccati,
    t_bar: float,
    v0: float,
    end: float,
    opts: IntegratorOptions,
    kinks: Sequence[float] = (),
    detect_zero_return: bool = False,
    flag_downward_zero: bool = False,
    label: str = "riccati",
) -> Trajectory:
    """
    Integrates ``eq`` from (t_bar, v0) down to ``end`` with RK45, one step at a time.

    The stored variable switches to the reciprocal when its magnitude reaches
    ``opts.switch_threshold`` and back when the reciprocal reaches
    1/``opts.switch_back``. A sign change of the reciprocal is a blow-up and
    ends the run. With ``detect_zero_return`` a direct-representation return
    from below to 0 also ends the run, once the value has dipped below
    ``-opts.zero_return_deadband``.
    """
    reciprocal = abs(v0) >= opts.switch_threshold and v0 != 0.0
    u = 1.0 / v0 if reciprocal else float(v0)
    t = float(t_bar)

    ts: List[float] = [t]
    us: List[float] = [u]
    recs: List[bool] = [reciprocal]
    pieces: List[DensePiece] = []
    anomalies: List[float] = []
    armed_negative = u < -opts.zero_return_deadband and not reciprocal
    armed_positive = u > opts.zero_return_deadband and not reciprocal
    back_limit = 1.0 / opts.switch_back

    def finish(kind: TerminationKind, t_star: float, value: float, rec: bool, err: float) -> Trajectory:
        event = TerminationEvent(
            kind=kind,
            t_star=t_star,
            value=value,
            repr=Representation.RECIPROCAL if rec else Representation.DIRECT,
            localization_error=err,
        )
        return Trajectory(ts, us, recs, pieces, event, anomalies)

    for bound in _stops(t, end, kinks):
        solver: Optional[RK45] = None
        while t > bound:
            if solver is None:
                rhs = eq.reciprocal_rhs if reciprocal else eq.direct_rhs
                solver = RK45(
                    rhs,
                    t,
                    [u],
                    bound,
                    rtol=opts.rtol,
                    atol=opts.atol,
                    max_step=opts.max_step,
                )
            message = solver.step()
            if solver.status == "failed":
                raise StepSizeUnderflow(
                    f"{label}: step failed at t={solver.t}: {message}", t=solver.t
                )
            t_old, u_old = t, u
            t, u = float(solver.t), float(solver.y[0])
            if not math.isfinite(u):
                raise NonFiniteState(f"{label}: non-finite state at t={t}.", t=t)
            dense = solver.dense_output()
            h = t_old - t

            # blow-up: the reciprocal changes sign
            if reciprocal and (u == 0.0 or (u_old > 0.0) != (u > 0.0)) and u_old != 0.0:
                t_star = _locate_root(dense, t, t_old, opts.root_xtol)
                pieces.append(DensePiece(t_old, t_star, dense, True))
                if t_star < t_old:
                    ts.append(t_star)
                    us.append(0.0)
                    recs.append(True)
                kind = (
                    TerminationKind.BLOWUP_PLUS_INF
                    if u_old > 0.0
                    else TerminationKind.BLOWUP_MINUS_INF
                )
                err = _localization_error(h, opts.root_xtol, opts.atol, eq.quad(t_star))
                return finish(kind, t_star, 0.0, True, err)

            if not reciprocal:
                if detect_zero_return and armed_negative and u_old < 0.0 <= u:
                    t_star = _locate_root(dense, t, t_old, opts.root_xtol)
                    pieces.append(DensePiece(t_old, t_star, dense, False))
                    if t_star < t_old:
                        ts.append(t_star)
                        us.append(0.0)
                        recs.append(False)
                    err = _localization_error(h, opts.root_xtol, opts.atol, eq.const(t_star))
                    return finish(TerminationKind.ZERO_RETURN, t_star, 0.0, False, err)
                if flag_downward_zero and armed_positive and u_old > 0.0 > u:
                    t_cross = _locate_root(dense, t, t_old, opts.root_xtol)
                    anomalies.append(t_cross)
                    armed_positive = False
                    logger.warning(
                        f"{label}: primal solution crossed zero downward at t={t_cross:.12g}."
                    )
                if u < -opts.zero_return_deadband:
                    armed_negative = True
                elif u > opts.zero_return_deadband:
                    armed_positive = True

            pieces.append(DensePiece(t_old, t, dense, reciprocal))
            ts.append(t)
            us.append(u)
            recs.append(reciprocal)

            if not reciprocal and abs(u) >= opts.switch_threshold:
                reciprocal, u, solver = True, 1.0 / u, None
            elif reciprocal and abs(u) >= back_limit:
                reciprocal, u, solver = False, 1.0 / u, None
                armed_negative = armed_negative or u < -opts.zero_return_deadband
                armed_positive = armed_positive or u > opts.zero_return_deadband

    return finish(TerminationKind.REACHED_TIME_LIMIT, t, u, reciprocal, 0.0)


def as_arrays(trajectory: Trajectory):
    return (
        np.asarray(trajectory.t, dtype=float),
        np.asarray(trajectory.value, dtype=float),
        np.asarray(trajectory.reciprocal, dtype=bool),
    )
