# solver/riccati_spectrum/services/spectrum_service.py

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..core.config import settings
from ..core.exceptions import (
    BracketInvalid,
    EnvelopeInfeasible,
    NumericalError,
    StructureChangedInsideBracket,
)
from ..schemas.chain import BlowupChain, ChainTerminationKind
from ..schemas.coefficients import CoefficientSet
from ..schemas.spectrum import (
    Bracket,
    Eigenvalue,
    GrowthReport,
    PeriodBounds,
    PeriodClass,
    RootKind,
    RootKindName,
    ScanOptions,
    SpectrumResult,
)
from .chain_service import chain_time_from, compute_chain, infer_offset_n
from .coeffs_service import (
    check_all_eigen_condition,
    constant_matrix_beta,
    envelope_system,
    envelopes,
    lambda_b,
)

logger = logging.getLogger(__name__)

_PREPHASE_MAX_ITER = 200


# --- Root functions ---
def root_value(chain: BlowupChain, root_kind: RootKind) -> Optional[float]:
    """t_j (raw) for chain-time roots, the continued dual value at 0 for defect roots."""
    if root_kind.kind == RootKindName.CHAIN_TIME:
        return chain_time_from(chain, root_kind.j, raw=True)
    return chain.value_at_zero


def root_structure(chain: BlowupChain, root_kind: RootKind):
    if root_kind.kind == RootKindName.CHAIN_TIME:
        return chain.reaches(root_kind.j)
    if chain.value_at_zero is None:
        return None
    return chain.defect_structure


def _scan_structure(chain: BlowupChain) -> Tuple:
    return chain.depth, chain.termination.kind, chain.last_kind


def _chain_for(c: CoefficientSet, lam: float, root_kind: RootKind, opts: ScanOptions) -> BlowupChain:
    max_depth = root_kind.j if root_kind.kind == RootKindName.CHAIN_TIME else None
    return compute_chain(c, lam, max_depth=max_depth, opts=opts.chain)


# --- Scanning ---
def scan_grid(lambda_lo: float, lambda_hi: float, opts: ScanOptions) -> np.ndarray:
    """Geometric grid on [lambda_lo, lambda_hi], shifted to positive values when needed."""
    shift = 0.0 if lambda_lo > 0 else 1.0 - lambda_lo
    lo, hi = lambda_lo + shift, lambda_hi + shift
    if opts.n_scan is not None:
        n = opts.n_scan
    else:
        n = max(2, int(math.ceil(math.log(hi / lo) / math.log(opts.ratio))) + 1)
    return np.geomspace(lo, hi, n) - shift


def _compute_chains(
    c: CoefficientSet, lams: Sequence[float], opts: ScanOptions
) -> List[BlowupChain]:
    if opts.threads <= 1 or len(lams) < 2:
        return [compute_chain(c, float(lam), opts=opts.chain) for lam in lams]
    with ThreadPoolExecutor(max_workers=opts.threads) as pool:
        return list(pool.map(lambda lam: compute_chain(c, float(lam), opts=opts.chain), lams))


def _refine(
    c: CoefficientSet,
    lo: Tuple[float, BlowupChain],
    hi: Tuple[float, BlowupChain],
    levels: int,
    opts: ScanOptions,
    out: Dict[float, BlowupChain],
) -> None:
    if levels <= 0 or _scan_structure(lo[1]) == _scan_structure(hi[1]):
        return
    mid = 0.5 * (lo[0] + hi[0])
    chain = compute_chain(c, mid, opts=opts.chain)
    out[mid] = chain
    _refine(c, lo, (mid, chain), levels - 1, opts, out)
    _refine(c, (mid, chain), hi, levels - 1, opts, out)


def scan_chains(
    c: CoefficientSet, lambda_lo: float, lambda_hi: float, opts: ScanOptions
) -> List[Tuple[float, BlowupChain]]:
    """Chains on the scan grid plus bisection points where the chain structure changes."""
    grid = scan_grid(lambda_lo, lambda_hi, opts)
    chains = _compute_chains(c, grid, opts)
    points: Dict[float, BlowupChain] = {float(lam): ch for lam, ch in zip(grid, chains)}
    for (l0, c0), (l1, c1) in zip(zip(grid, chains), zip(grid[1:], chains[1:])):
        _refine(c, (float(l0), c0), (float(l1), c1), opts.refine_levels, opts, points)
    return sorted(points.items())


def _brackets_from(
    points: Sequence[Tuple[float, BlowupChain]], root_kind: RootKind
) -> List[Bracket]:
    brackets: List[Bracket] = []
    values = [(lam, root_value(ch, root_kind), root_structure(ch, root_kind)) for lam, ch in points]
    for (l0, f0, s0), (l1, f1, s1) in zip(values, values[1:]):
        if root_kind.kind == RootKindName.CHAIN_TIME:
            # t_j increases with lambda; below-zero lower ends are allowed
            if not s1 or f1 is None or f1 < 0:
                continue
            if s0 and f0 is not None and f0 >= 0:
                continue
        else:
            if s0 is None or s0 != s1 or f0 is None or f1 is None:
                continue
            if not ((f0 < 0 <= f1) or (f0 > 0 >= f1)):
                continue
        brackets.append(Bracket(lo=l0, hi=l1, root_kind=root_kind, f_lo=f0, f_hi=f1))
    return brackets


def bracket_scan(
    c: CoefficientSet,
    root_kind: RootKind,
    lambda_lo: float,
    lambda_hi: float,
    n_scan: Optional[int] = None,
    opts: Optional[ScanOptions] = None,
    points: Optional[Sequence[Tuple[float, BlowupChain]]] = None,
) -> List[Bracket]:
    """
    Sign changes of the chosen root function between neighbouring scan points
    whose chains share the structure that root function needs.
    """
    opts = opts or ScanOptions()
    if n_scan is not None:
        opts = opts.model_copy(update={"n_scan": n_scan})
    lam_b = lambda_b(c, opts.grid_n)
    if math.isfinite(lam_b) and lambda_lo < lam_b:
        logger.warning(
            f"Scan starts at {lambda_lo} below lambda_b={lam_b}; chain alternation is not guaranteed."
        )
    if lambda_hi <= lambda_lo:
        return []
    if points is None:
        points = scan_chains(c, lambda_lo, lambda_hi, opts)
    return _brackets_from(points, root_kind)


# --- Root solving ---
def _eigenvalue_record(
    lam: float,
    bracket: Tuple[float, float],
    chain: BlowupChain,
    root_kind: RootKind,
    residual: float,
) -> Eigenvalue:
    defect = chain.termination.defect
    return Eigenvalue(
        order_index=1,
        lam=lam,
        bracket=bracket,
        defect_residual=defect if defect is not None else math.nan,
        root_residual=residual,
        chain=chain,
        method="chain_root" if root_kind.kind == RootKindName.CHAIN_TIME else "defect_root",
        root_kind=root_kind,
    )


def solve_eigenvalue(
    c: CoefficientSet,
    bracket: Bracket,
    root_kind: Optional[RootKind] = None,
    tol: Optional[float] = None,
    opts: Optional[ScanOptions] = None,
) -> Eigenvalue:
    """
    Refines a bracket to an eigenvalue.

    A bisection pre-phase moves the lower end up while its chain stops short
    of the required breakpoint; brentq then solves on a bracket whose ends
    share the chain structure.
    """
    opts = opts or ScanOptions()
    root_kind = root_kind or bracket.root_kind
    tol = tol or opts.tol
    lo, hi = bracket.lo, bracket.hi

    def evaluate(lam: float) -> Tuple[Optional[float], object, BlowupChain]:
        chain = _chain_for(c, lam, root_kind, opts)
        return root_value(chain, root_kind), root_structure(chain, root_kind), chain

    if lo == hi:
        f, _, chain = evaluate(lo)
        return _eigenvalue_record(lo, (lo, hi), chain, root_kind, f if f is not None else math.nan)

    f_hi, s_hi, _ = evaluate(hi)
    f_lo, s_lo, _ = evaluate(lo)
    if f_hi is None or not s_hi:
        raise BracketInvalid(f"Upper end {hi} has no {root_kind} value.", lo=lo, hi=hi)

    if root_kind.kind == RootKindName.CHAIN_TIME:
        for _ in range(_PREPHASE_MAX_ITER):
            if f_lo is not None and s_lo:
                break
            if hi - lo <= tol * max(1.0, abs(hi)):
                raise BracketInvalid(
                    f"No point of [{lo}, {hi}] reaches breakpoint {root_kind.j}.", lo=lo, hi=hi
                )
            mid = 0.5 * (lo + hi)
            f_mid, s_mid, _ = evaluate(mid)
            if f_mid is None or not s_mid or f_mid < 0:
                lo, f_lo, s_lo = mid, f_mid, s_mid
            else:
                hi, f_hi, s_hi = mid, f_mid, s_mid
    elif s_lo != s_hi:
        raise StructureChangedInsideBracket(
            f"Chain structure differs at the ends of [{lo}, {hi}]: {s_lo} vs {s_hi}.",
            lo=lo,
            hi=hi,
        )

    if f_lo is None or f_lo * f_hi > 0:
        raise BracketInvalid(
            f"{root_kind} does not change sign on [{lo}, {hi}] ({f_lo}, {f_hi}).", lo=lo, hi=hi
        )

    structure = s_hi

    def f(lam: float) -> float:
        value, s, _ = evaluate(lam)
        if value is None or s != structure:
            raise StructureChangedInsideBracket(
                f"Chain structure changed inside the bracket at lambda={lam}.", lam=lam
            )
        return value

    if f_lo == 0.0:
        root = lo
    elif f_hi == 0.0:
        root = hi
    else:
        root = float(brentq(f, lo, hi, xtol=tol * max(1.0, abs(lo), abs(hi))))

    residual = f(root)
    slack = max(opts.chain.zero_slack, 10.0 * tol, 2.0 * abs(residual))
    final_opts = opts.chain.with_slack(slack)
    chain = compute_chain(c, root, opts=final_opts)
    if chain.termination.kind != ChainTerminationKind.DEFECT_AT_ZERO:
        raise StructureChangedInsideBracket(
            f"Root lambda={root:.15g} of {root_kind}: final chain ends "
            f"{chain.termination.kind.value}, not at t = 0.",
            lam=root,
        )
    return _eigenvalue_record(root, (bracket.lo, bracket.hi), chain, root_kind, residual)


def _dedup(eigs: List[Eigenvalue], rel_tol: float) -> List[Eigenvalue]:
    merged: List[Eigenvalue] = []
    for e in sorted(eigs, key=lambda e: e.lam):
        if merged and abs(e.lam - merged[-1].lam) <= rel_tol * max(1.0, abs(e.lam)):
            continue
        merged.append(e)
    return merged


def enumerate_eigenvalues(
    c: CoefficientSet,
    lambda_max: float,
    opts: Optional[ScanOptions] = None,
    lambda_min: Optional[float] = None,
) -> SpectrumResult:
    """
    Eigenvalues in (lambda_min, lambda_max]: chain-time roots for odd j and
    defect roots, deduplicated and numbered in increasing order.
    """
    opts = opts or ScanOptions()
    lam_b = lambda_b(c, opts.grid_n)
    if lambda_min is None:
        if not math.isfinite(lam_b):
            raise BracketInvalid("lambda_b is undefined; pass lambda_min explicitly.")
        start = lam_b * (1.0 + 1e-6) if lam_b > 0 else lam_b + 1e-6
    else:
        start = float(lambda_min)
    below = "NONE" if check_all_eigen_condition(c, opts.grid_n) else "UNKNOWN"

    if lambda_max <= start:
        return SpectrumResult(
            lambda_b=lam_b, lambda_min=start, lambda_max=lambda_max, below_lambda_b=below
        )

    points = scan_chains(c, start, lambda_max, opts)
    deepest = max(len(ch.breakpoints) - 1 for _, ch in points)
    kinds = [RootKind.chain_time(j) for j in range(1, max(deepest, 1) + 1, 2)]
    kinds.append(RootKind.defect())

    found: List[Eigenvalue] = []
    for root_kind in kinds:
        for bracket in _brackets_from(points, root_kind):
            try:
                found.append(solve_eigenvalue(c, bracket, root_kind, opts.tol, opts))
            except NumericalError as e:
                logger.warning(f"Skipping bracket [{bracket.lo}, {bracket.hi}] of {root_kind}: {e}")

    dedup_tol = max(opts.dedup_rel_tol, 2.0 * opts.tol)
    eigs = [
        e
        for e in _dedup(found, dedup_tol)
        if start <= e.lam <= lambda_max and e.chain.is_eigen(max(opts.tol, 1e-6))
    ]
    offset = infer_offset_n(eigs[0].chain) if eigs else None
    numbered = [
        e.model_copy(
            update={
                "order_index": i + 1,
                "chain": e.chain.model_copy(update={"offset_n": offset}),
            }
        )
        for i, e in enumerate(eigs)
    ]
    logger.info(
        f"Found {len(numbered)} eigenvalues in [{start:.6g}, {lambda_max:.6g}] "
        f"from {len(points)} scan points."
    )
    return SpectrumResult(
        lambda_b=lam_b,
        lambda_min=start,
        lambda_max=lambda_max,
        eigenvalues=numbered,
        below_lambda_b=below,
    )


# --- Growth and period bounds ---
def growth_ratios(eigs: Sequence[Eigenvalue]) -> GrowthReport:
    if len(eigs) < 2:
        raise ValueError("growth_ratios needs at least two eigenvalues.")
    ratios = [(e.order_index, e.lam / e.order_index**2) for e in eigs]
    tail = [r for _, r in ratios[len(ratios) // 2 :]]
    return GrowthReport(ratios=ratios, tail_min=min(tail), tail_max=max(tail))


def deterministic_eigenvalues(T: float, count: int) -> List[float]:
    """((2m - 1) pi / (2T))^2, m = 1..count."""
    return [((2 * m - 1) * math.pi / (2.0 * T)) ** 2 for m in range(1, count + 1)]


def _auxiliary_beta(env, H_under_22: float) -> float:
    return constant_matrix_beta(
        [
            [env.H11.upper, env.H12.upper, env.H13_abs.upper],
            [env.H21.upper, H_under_22, env.H23_hat],
            [env.H31.upper, env.H32.upper, env.H33.lower],
        ]
    )


def auxiliary_H22(env, start: Optional[float] = None) -> float:
    """Doubles H_under_22 from ``start`` (default the lower H22 envelope) until monotone."""
    H = start if start is not None else env.H22.lower
    for _ in range(settings.H_UNDER_MAX_DOUBLINGS + 1):
        if H < env.H22.upper and _auxiliary_beta(env, H) > 0:
            return H
        H *= 2.0
    raise EnvelopeInfeasible(
        f"No auxiliary H22 within {settings.H_UNDER_MAX_DOUBLINGS} doublings makes the "
        f"slower system monotone."
    )


def period_bounds(
    c: CoefficientSet,
    m: int,
    H_under_22: Optional[float] = None,
    opts: Optional[ScanOptions] = None,
) -> PeriodBounds:
    opts = opts or ScanOptions()
    env = envelopes(c, opts.grid_n)
    if H_under_22 is not None and not (
        H_under_22 < env.H22.upper and _auxiliary_beta(env, H_under_22) > 0
    ):
        logger.warning(f"H_under_22={H_under_22} fails the monotonicity check; adjusting.")
        H_under_22 = auxiliary_H22(env, min(H_under_22, env.H22.lower))
    elif H_under_22 is None:
        H_under_22 = auxiliary_H22(env)

    T2 = c.T * c.T
    m2pi2 = (math.pi * m) ** 2
    lower = (env.H22.upper - H_under_22) / env.h22.lower + m2pi2 / (
        -2.0 * env.H11.upper * env.h22.lower * T2
    )
    upper = 4.0 * m2pi2 / (-env.H11.lower * env.h22.upper * T2)
    ordered = lower <= upper
    if not ordered:
        logger.warning(f"Period bounds for m={m} are not ordered: {lower} > {upper}.")
    return PeriodBounds(
        m=m,
        lower=lower,
        upper=upper,
        envelopes_used=env,
        H_under_22=H_under_22,
        ordered=ordered,
    )


def classify_period(
    c: CoefficientSet, lam: float, m: int, opts: Optional[ScanOptions] = None
) -> PeriodClass:
    bounds = period_bounds(c, m, opts=opts)
    if lam > bounds.upper:
        return PeriodClass.GREATER_THAN_M
    if lam < bounds.lower:
        return PeriodClass.LESS_THAN_M
    return PeriodClass.INCONCLUSIVE


def sandwich_eigenvalues(
    c: CoefficientSet, count: int, opts: Optional[ScanOptions] = None
) -> Dict[str, List[float]]:
    """
    First ``count`` eigenvalues of the slower and faster envelope systems.

    The slower ones bound the eigenvalues of ``c`` from below, the faster ones
    from above.
    """
    opts = opts or ScanOptions()
    env = envelopes(c, opts.grid_n)
    reach = 1.2 * 4.0 * (math.pi * count) ** 2 / (-env.H11.lower * env.h22.upper * c.T**2)
    out: Dict[str, List[float]] = {}
    for side in ("slower", "faster"):
        system = envelope_system(c, side, env=env)
        result = enumerate_eigenvalues(system, reach, opts)
        out[side] = result.values[:count]
    return out


