# solver/riccati_spectrum/services/fbsde_service.py

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import ChainNotEigen, NonFiniteState, SingularDenominator
from ..schemas.chain import BlowupChain, ChainTerminationKind
from ..schemas.coefficients import CoefficientSet
from ..schemas.common import Equation
from ..schemas.fbsde import (
    EigenfunctionPath,
    PathStatistics,
    ResidualReport,
    SimulationOptions,
)
from ..schemas.riccati import RiccatiSolution
from ..schemas.spectrum import Eigenvalue
from ..utils.rng import brownian_increments
from .chain_service import compute_chain
from .riccati_service import dual_coefficients

logger = logging.getLogger(__name__)

_SINGULAR_EPS = 1e-14

Interval = Tuple[float, float, Equation]


# --- Algebraic relation ---
def algebraic_m(c: CoefficientSet, t: float, k: float) -> float:
    """m = k (H31 + H32 k) / (1 - k H33) at time t."""
    denom = 1.0 - k * c.H33(t)
    if abs(denom) < _SINGULAR_EPS:
        raise SingularDenominator(f"1 - k*H33 vanishes at t={t} (k={k}).", t=t, k=k)
    return k * (c.H31(t) + c.H32(t) * k) / denom


def algebraic_m_array(c: CoefficientSet, t: np.ndarray, k: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    k = np.asarray(k, dtype=float)
    denom = 1.0 - k * c.H33.evaluate(t)
    bad = np.abs(denom) < _SINGULAR_EPS
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SingularDenominator(f"1 - k*H33 vanishes at t={t[i]} (k={k[i]}).", t=float(t[i]))
    return k * (c.H31.evaluate(t) + c.H32.evaluate(t) * k) / denom


def legendre_to_primal(
    xt: np.ndarray, yt: np.ndarray, zt: np.ndarray, dual_c: CoefficientSet, t: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, y, z) = (ỹ, x̃, H̃31 x̃ + H̃32 ỹ + H̃33 z̃)."""
    z = dual_c.H31.evaluate(t) * xt + dual_c.H32.evaluate(t) * yt + dual_c.H33.evaluate(t) * zt
    return yt, xt, z


# --- Intervals ---
def segment_intervals(chain: BlowupChain, tol: float = 1e-6) -> List[Interval]:
    """
    Splits [0, T] at midpoints between the segment starts of an eigen-chain.

    Intervals are returned bottom first: the one at 0 is dual, the top one
    primal, and kinds alternate in between.
    """
    term = chain.termination
    if term.kind != ChainTerminationKind.DEFECT_AT_ZERO or term.defect is None:
        raise ChainNotEigen(
            f"Chain at lambda={chain.lam} ends {term.kind.value}, not at t = 0.", lam=chain.lam
        )
    if abs(term.defect) > tol:
        raise ChainNotEigen(
            f"Chain at lambda={chain.lam} has defect {term.defect:.3e} > {tol:.1e}.",
            lam=chain.lam,
        )
    nodes = list(chain.breakpoints[: chain.depth])
    if chain.last_kind == Equation.PRIMAL:
        nodes.append(0.0)
    cuts = [chain.T] + [0.5 * (a + b) for a, b in zip(nodes, nodes[1:])] + [0.0]
    top_down = [
        (lo, hi, Equation.PRIMAL if i % 2 == 0 else Equation.DUAL)
        for i, (hi, lo) in enumerate(zip(cuts, cuts[1:]))
    ]
    return top_down[::-1]


def simulation_grid(intervals: Sequence[Interval], T: float, n_steps: int) -> np.ndarray:
    """Uniform sub-grid per interval, ceil(n_steps * length / T) steps each."""
    pieces = []
    for lo, hi, _ in intervals:
        steps = max(1, math.ceil(n_steps * (hi - lo) / T))
        pieces.append(np.linspace(lo, hi, steps + 1)[:-1])
    pieces.append(np.array([T]))
    return np.concatenate(pieces)


# --- Riccati values on the grid ---
def _segment_for(chain: BlowupChain, t: float) -> RiccatiSolution:
    bps = chain.breakpoints
    for i in range(chain.depth - 1):
        if bps[i + 1] < t <= bps[i]:
            return chain.segments[i]
    return chain.segments[-1]


def _riccati_on(chain: BlowupChain, times: np.ndarray, kind: Equation) -> np.ndarray:
    out = np.empty(times.size)
    for i, t in enumerate(times):
        seg = _segment_for(chain, float(t))
        # a segment ending within the zero slack stops just above 0
        s = max(float(t), seg.t_end)
        out[i] = seg.primal_value(s) if kind == Equation.PRIMAL else seg.dual_value(s)
    return out


def _with_segments(c: CoefficientSet, eig: Eigenvalue, opts: SimulationOptions) -> BlowupChain:
    if eig.chain.segments:
        return eig.chain
    slack = max(opts.chain.zero_slack, 10.0 * opts.defect_tol)
    return compute_chain(c, eig.lam, opts=opts.chain.with_slack(slack))


# --- Simulation ---
def simulate_eigenfunction(
    c: CoefficientSet,
    eig: Eigenvalue,
    n_steps: Optional[int] = None,
    n_paths: Optional[int] = None,
    seed: Optional[int] = None,
    y0: Optional[float] = None,
    opts: Optional[SimulationOptions] = None,
) -> EigenfunctionPath:
    """
    Euler-Maruyama eigenfunction paths for an eigenvalue.

    Dual intervals run the dual forward SDE for x̃ from x̃(0) = y0 and map
    back to (x, y, z); primal intervals run the primal forward SDE for x.
    At each boundary the new forward state is the previous interval's
    backward component.
    """
    opts = opts or SimulationOptions()
    n_steps = n_steps if n_steps is not None else opts.n_steps
    n_paths = n_paths if n_paths is not None else opts.n_paths
    seed = seed if seed is not None else opts.seed
    y0 = y0 if y0 is not None else opts.y0
    lam = eig.lam

    chain = _with_segments(c, eig, opts)
    intervals = segment_intervals(chain, opts.defect_tol)
    grid = simulation_grid(intervals, c.T, n_steps)
    dt = np.diff(grid)
    dB = brownian_increments(seed, n_paths, dt)
    dual_c = dual_coefficients(c, lam)

    n = dt.size
    x = np.zeros((n_paths, n + 1))
    y = np.zeros((n_paths, n + 1))
    z = np.zeros((n_paths, n + 1))
    riccati = np.zeros(n + 1)

    state = np.full(n_paths, float(y0))
    start = 0
    for lo, hi, kind in intervals:
        stop = int(np.searchsorted(grid, hi, side="left"))
        idx = np.arange(start, stop + 1)
        t = grid[idx]
        system = c if kind == Equation.PRIMAL else dual_c
        k = _riccati_on(chain, t, kind)
        if kind == Equation.DUAL and t[0] == 0.0:
            k[0] = 0.0
        if kind == Equation.PRIMAL and t[-1] == c.T:
            k[-1] = 0.0
        m = algebraic_m_array(system, t, k)

        h22 = c.h22.evaluate(t) if kind == Equation.PRIMAL else 0.0
        drift = (
            system.H21.evaluate(t)
            + (system.H22.evaluate(t) - lam * h22) * k
            + system.H23.evaluate(t) * m
        )
        diffusion = (
            system.H31.evaluate(t) + system.H32.evaluate(t) * k + system.H33.evaluate(t) * m
        )

        fwd = np.empty((n_paths, idx.size))
        fwd[:, 0] = state
        for s in range(idx.size - 1):
            g = idx[s]
            fwd[:, s + 1] = fwd[:, s] * (1.0 + drift[s] * dt[g] + diffusion[s] * dB[:, g])
        if not np.all(np.isfinite(fwd)):
            raise NonFiniteState(
                f"Forward state overflowed on [{lo}, {hi}] ({kind.value}).", lam=lam
            )

        bwd = k * fwd
        zz = m * fwd
        if kind == Equation.PRIMAL:
            x[:, idx], y[:, idx], z[:, idx] = fwd, bwd, zz
        else:
            x[:, idx], y[:, idx], z[:, idx] = legendre_to_primal(fwd, bwd, zz, dual_c, t)
        riccati[idx] = k
        state = bwd[:, -1]
        start = stop

    logger.info(
        f"Simulated {n_paths} eigenfunction paths at lambda={lam:.12g} on {len(intervals)} "
        f"intervals, {n} steps."
    )
    return EigenfunctionPath(
        grid=grid,
        dt=dt,
        segments=intervals,
        x=x,
        y=y,
        z=z,
        riccati=riccati,
        dB=dB,
        brownian_seed=seed,
        n_paths=n_paths,
        y0=y0,
        lam=lam,
    )


# --- Residuals ---
def bsde_residual(path: EigenfunctionPath, c: CoefficientSet, lam: float) -> ResidualReport:
    """Per-step residuals of both equations of the Hamiltonian system, as RMS and max."""
    t = path.grid[:-1]
    x, y, z = path.x[:, :-1], path.y[:, :-1], path.z[:, :-1]
    dt, dB = path.dt, path.dB

    def ev(name: str) -> np.ndarray:
        return getattr(c, name).evaluate(t)

    backward = (
        np.diff(path.y, axis=1)
        + (ev("H11") * x + ev("H12") * y + ev("H13") * z) * dt
        - z * dB
    )
    forward = (
        np.diff(path.x, axis=1)
        - (ev("H21") * x + (ev("H22") - lam * ev("h22")) * y + ev("H23") * z) * dt
        - (ev("H31") * x + ev("H32") * y + ev("H33") * z) * dB
    )
    return ResidualReport(
        backward_rms=float(np.sqrt(np.mean(backward**2))),
        forward_rms=float(np.sqrt(np.mean(forward**2))),
        backward_max=float(np.max(np.abs(backward))),
        forward_max=float(np.max(np.abs(forward))),
        n_steps=int(dt.size),
        n_paths=path.n_paths,
    )


def path_statistics(path: EigenfunctionPath) -> PathStatistics:
    return PathStatistics(
        grid=path.grid,
        x_mean=path.x.mean(axis=0),
        y_mean=path.y.mean(axis=0),
        z_mean=path.z.mean(axis=0),
        x_std=path.x.std(axis=0),
    )
