# solver/riccati_spectrum/services/reference_systems.py

import logging
import math
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np

from ..core.exceptions import InvalidCoefficientFunction, NumericalError
from ..schemas.coefficients import CoefficientFn, CoefficientSet
from ..schemas.riccati import IntegratorOptions, TerminationKind
from .riccati_service import integrate_dual

logger = logging.getLogger(__name__)

EXAMPLE8_LAMBDA = 3.0
EXAMPLE8_AUX_HORIZON = 15.0 / 28.0
EXAMPLE8_H = dict(H11=3.0, H12=0.0, H13=1.0, H21=0.0, H22=-4.0, H23=2.0, H31=1.0, H32=2.0, H33=-2.0)


def diagonal(T: float = 1.0) -> CoefficientSet:
    """H11 = 1, H22 = H33 = -1, h22 = -1; eigenvalues 1 + ((2m - 1) pi / (2T))^2."""
    return CoefficientSet.constant(T, H11=1.0, H22=-1.0, H33=-1.0, h22=-1.0)


def diagonal_eigenvalues(count: int, T: float = 1.0):
    return [1.0 + ((2 * m - 1) * math.pi / (2.0 * T)) ** 2 for m in range(1, count + 1)]


def example8_T2() -> float:
    """Blow-up length of the primal at lambda = 3 on the flat part of h22."""
    r = math.sqrt(11.0)
    return (math.pi / 2.0 - math.atan(1.0 / r)) * 2.0 / r


def _ramp(L: float) -> Callable[[float], float]:
    return lambda t: -10.0 * (t - L) - 1.0


def example8_auxiliary(L: float = EXAMPLE8_AUX_HORIZON) -> CoefficientSet:
    """The system on [0, L] with h22(t) = -10 (t - L) - 1."""
    h22 = CoefficientFn.pwlinear([0.0, L], [_ramp(L)(0.0), -1.0])
    return CoefficientSet.constant(L, **EXAMPLE8_H).replace(h22=h22)


@lru_cache(maxsize=4)
def example8_T1(rtol: Optional[float] = None, atol: Optional[float] = None) -> float:
    """
    Length of the ramp of h22.

    The dual at lambda = 3 started from 0 at L returns to 0 at t*; shifting the
    ramp so that it ends at T1 = L - t* moves the return to t = 0.
    """
    opts = IntegratorOptions(
        **{k: v for k, v in (("rtol", rtol), ("atol", atol)) if v is not None}
    )
    aux = example8_auxiliary()
    solution = integrate_dual(aux, EXAMPLE8_LAMBDA, aux.T, 0.0, opts)
    event = solution.termination
    if event.kind != TerminationKind.ZERO_RETURN or not 0.0 <= event.t_star < aux.T:
        raise NumericalError(
            f"Auxiliary dual ended with {event.kind.value} at t={event.t_star}, "
            f"expected a zero return in [0, {aux.T})."
        )
    T1 = aux.T - event.t_star
    logger.info(f"Zero return at t*={event.t_star:.15g}; T1={T1:.15g}.")
    return T1


def example8(T1: Optional[float] = None) -> CoefficientSet:
    """
    Constant H with h22 ramping from 10 T1 - 1 down to -1 on [0, T1], flat after.

    lambda = 3 is an eigenvalue: the primal blows up at T1 and the dual
    restarted there returns to 0 exactly at t = 0.
    """
    T1 = example8_T1() if T1 is None else T1
    T = T1 + example8_T2()
    h22 = CoefficientFn.pwlinear([0.0, T1, T], [10.0 * T1 - 1.0, -1.0, -1.0])
    return CoefficientSet.constant(T, **EXAMPLE8_H).replace(h22=h22)


def example8_frozen(T: Optional[float] = None) -> CoefficientSet:
    """Same H with h22 = -1 throughout; lambda_b = 2."""
    T = (example8_T1() + example8_T2()) if T is None else T
    return CoefficientSet.constant(T, **EXAMPLE8_H, h22=-1.0)


def time_dependent(T: float = 1.0) -> CoefficientSet:
    """H11 = 1 + 0.1 sin t, H22 = -1 - 0.1 cos t, H33 = -1, h22 = -1 - 0.05 sin t."""
    base = CoefficientSet.constant(T, H33=-1.0)
    return base.replace(
        H11=CoefficientFn.from_callable(lambda t: 1.0 + 0.1 * np.sin(t), T),
        H22=CoefficientFn.from_callable(lambda t: -1.0 - 0.1 * np.cos(t), T),
        h22=CoefficientFn.from_callable(lambda t: -1.0 - 0.05 * np.sin(t), T),
    )


SYSTEMS: Dict[str, Callable[[], CoefficientSet]] = {
    "diagonal": diagonal,
    "example8": example8,
    "example8_frozen": example8_frozen,
    "time_dependent": time_dependent,
}


def get_system(name: str) -> CoefficientSet:
    try:
        builder = SYSTEMS[name]
    except KeyError:
        raise InvalidCoefficientFunction(
            f"Unknown system '{name}'; choose one of {sorted(SYSTEMS)}."
        ) from None
    return builder()
