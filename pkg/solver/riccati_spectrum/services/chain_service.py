# solver/riccati_spectrum/services/chain_service.py

import logging
from typing import List, Optional

from ..core.exceptions import FloorReached
from ..schemas.chain import (
    BlowupChain,
    ChainOptions,
    ChainTermination,
    ChainTerminationKind,
)
from ..schemas.coefficients import CoefficientSet
from ..schemas.common import Equation, Representation
from ..schemas.riccati import RiccatiSolution, TerminationKind
from .riccati_service import integrate_dual, integrate_primal

logger = logging.getLogger(__name__)

_EXPECTED_BLOWUP = {
    Equation.PRIMAL: TerminationKind.BLOWUP_PLUS_INF,
    Equation.DUAL: TerminationKind.BLOWUP_MINUS_INF,
}


def _dual_at_zero(solution: RiccatiSolution) -> Optional[float]:
    if solution.t_end <= 0.0 <= solution.t_bar:
        return float(solution.dual_value(0.0))
    return None


def _representation_at_zero(solution: RiccatiSolution) -> Representation:
    for piece in solution.pieces:
        if piece.t_lo <= 0.0 <= piece.t_hi:
            return Representation.RECIPROCAL if piece.reciprocal else Representation.DIRECT
    return Representation.DIRECT


def compute_chain(
    c: CoefficientSet,
    lam: float,
    max_depth: Optional[int] = None,
    opts: Optional[ChainOptions] = None,
) -> BlowupChain:
    """
    Alternates primal and dual Riccati segments from T downward.

    Each segment restarts at 0 at the previous breakpoint. The chain stops when
    a blow-up lands at or below 0, when the segment covering 0 survives (the
    defect is its dual value at 0), when the dual returns to 0, or at
    ``max_depth`` segments.
    """
    opts = opts or ChainOptions()
    max_depth = max_depth or opts.max_depth
    breakpoints: List[float] = [c.T]
    kinds: List[Equation] = []
    segments: List[RiccatiSolution] = []

    def done(termination: ChainTermination, value_at_zero: Optional[float]) -> BlowupChain:
        return BlowupChain(
            lam=lam,
            T=c.T,
            breakpoints=breakpoints,
            kinds=kinds,
            termination=termination,
            value_at_zero=value_at_zero,
            segments=tuple(segments),
        )

    t_start = c.T
    for index in range(max_depth):
        kind = Equation.PRIMAL if index % 2 == 0 else Equation.DUAL
        kinds.append(kind)
        try:
            if kind == Equation.PRIMAL:
                solution = integrate_primal(c, lam, t_start, 0.0, opts.integrator)
            else:
                solution = integrate_dual(c, lam, t_start, 0.0, opts.integrator)
        except FloorReached as e:
            solution = e.solution
            segments.append(solution)
            defect = float(solution.dual_value(0.0))
            logger.debug(f"lambda={lam:.12g}: segment {index + 1} ({kind.value}) survives to the floor.")
            return done(
                ChainTermination(
                    kind=ChainTerminationKind.DEFECT_AT_ZERO,
                    defect=defect,
                    repr=_representation_at_zero(solution),
                ),
                defect,
            )
        segments.append(solution)
        event = solution.termination
        eps = event.localization_error + opts.zero_slack

        if event.is_blowup:
            if event.kind != _EXPECTED_BLOWUP[kind]:
                logger.warning(
                    f"lambda={lam:.12g}: {kind.value} segment {index + 1} ended with "
                    f"{event.kind.value}; segment kinds no longer alternate cleanly."
                )
            breakpoints.append(event.t_star)
            if event.t_star > eps:
                t_start = event.t_star
                continue
            if kind == Equation.PRIMAL and abs(event.t_star) <= eps:
                return done(
                    ChainTermination(
                        kind=ChainTerminationKind.DEFECT_AT_ZERO,
                        defect=0.0,
                        repr=Representation.RECIPROCAL,
                    ),
                    0.0,
                )
            return done(
                ChainTermination(
                    kind=ChainTerminationKind.CROSSED_ZERO,
                    j=len(breakpoints) - 1,
                    t_j=event.t_star,
                ),
                _dual_at_zero(solution),
            )

        # zero return of the dual
        if event.t_star > eps:
            continued = integrate_dual(
                c, lam, t_start, 0.0, opts.integrator, t_stop=0.0, detect_zero_return=False
            )
            return done(
                ChainTermination(
                    kind=ChainTerminationKind.ZERO_RETURN_AT_INTERIOR, t_star=event.t_star
                ),
                float(continued.dual_value(0.0)),
            )
        defect = 0.0 if abs(event.t_star) <= eps else float(solution.dual_value(0.0))
        return done(
            ChainTermination(
                kind=ChainTerminationKind.DEFECT_AT_ZERO,
                defect=defect,
                repr=Representation.DIRECT,
                t_star=event.t_star,
            ),
            defect,
        )

    logger.info(f"lambda={lam:.12g}: chain reached max_depth={max_depth} above t = 0.")
    return done(ChainTermination(kind=ChainTerminationKind.DEPTH_EXCEEDED), None)


def chain_time(
    c: CoefficientSet,
    lam: float,
    j: int,
    opts: Optional[ChainOptions] = None,
    raw: bool = False,
) -> Optional[float]:
    """
    t_j(lam), or None when the chain stops before breakpoint j or t_j < 0.

    With ``raw`` a recorded negative t_j is returned as is.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    chain = compute_chain(c, lam, max_depth=j, opts=opts)
    return chain_time_from(chain, j, raw=raw)


def chain_time_from(chain: BlowupChain, j: int, raw: bool = False) -> Optional[float]:
    if not chain.reaches(j):
        return None
    t_j = chain.breakpoints[j]
    if raw or t_j >= 0.0:
        return t_j
    return None


def eigen_defect(
    c: CoefficientSet, lam: float, opts: Optional[ChainOptions] = None
) -> Optional[float]:
    """Dual value at 0 of a chain ending defect_at_zero; None otherwise."""
    chain = compute_chain(c, lam, opts=opts)
    if chain.termination.kind != ChainTerminationKind.DEFECT_AT_ZERO:
        return None
    return chain.termination.defect


def chain_segment_lengths(chain: BlowupChain) -> List[float]:
    """Length of each segment above 0; the last one is cut at 0."""
    bounds = list(chain.breakpoints)
    lengths = [hi - max(lo, 0.0) for hi, lo in zip(bounds, bounds[1:])]
    if len(lengths) < chain.depth:
        lengths.append(max(bounds[-1], 0.0))
    return lengths


def infer_offset_n(chain: BlowupChain) -> int:
    """Primal/dual segment pairs completed before the segment carrying the eigenvalue."""
    return (chain.depth - 1) // 2
