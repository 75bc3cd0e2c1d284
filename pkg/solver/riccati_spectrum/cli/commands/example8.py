# solver/riccati_spectrum/cli/commands/example8.py

import logging
from typing import Any, Dict, Optional

from ...core.exceptions import NumericalError
from ...schemas.chain import ChainTerminationKind
from ...schemas.run_config import RunConfig
from ...services import reference_systems
from ...services.chain_service import compute_chain
from ...services.spectrum_service import enumerate_eigenvalues
from .. import options
from ..deps import build_config, emit, tracked

logger = logging.getLogger(__name__)

LAMBDA_WINDOW = (2.99, 3.01)
# events this close to T1 or to t = 0 count as landing on them
EVENT_TOL = 1e-6


def run_example8(cfg: RunConfig) -> Dict[str, Any]:
    """
    Rebuilds the worked system with a zero-return eigenvalue at lambda = 3.

    T1 comes from the auxiliary dual run, T2 from the closed-form blow-up
    length; the defect root is then refined in a window around 3.
    """
    T1 = reference_systems.example8_T1(cfg.rtol, cfg.atol)
    T2 = reference_systems.example8_T2()
    c = reference_systems.example8(T1)
    scan = cfg.scan_options()

    chain_opts = scan.chain.with_slack(max(scan.chain.zero_slack, EVENT_TOL))
    chain = compute_chain(c, reference_systems.EXAMPLE8_LAMBDA, opts=chain_opts)
    term = chain.termination
    if term.kind != ChainTerminationKind.DEFECT_AT_ZERO:
        raise NumericalError(f"Chain at lambda=3 ended {term.kind.value}, expected t = 0.")
    if len(chain.breakpoints) < 2 or abs(chain.breakpoints[1] - T1) > EVENT_TOL:
        raise NumericalError(f"Primal blow-up at lambda=3 missed T1={T1:.15g}: {chain.breakpoints}.")

    lo, hi = LAMBDA_WINDOW
    window = enumerate_eigenvalues(c, hi, scan, lambda_min=lo)
    if not window.eigenvalues:
        raise NumericalError(f"No eigenvalue found in [{lo}, {hi}].")
    eig = min(window.eigenvalues, key=lambda e: abs(e.lam - reference_systems.EXAMPLE8_LAMBDA))
    logger.info(f"Example system: T1={T1:.15g}, T2={T2:.15g}, lambda_hat={eig.lam:.15g}")
    return {
        "T1": T1,
        "T2": T2,
        "T": c.T,
        "lambda_hat": eig.lam,
        "defect": eig.defect_residual,
        "blowup_time": chain.breakpoints[1] if len(chain.breakpoints) > 1 else None,
        "zero_return_time": term.t_star,
        "chain": chain,
    }


@tracked("example8")
def example8_command(
    rtol: Optional[float] = options.RTOL,
    atol: Optional[float] = options.ATOL,
    tol: Optional[float] = options.TOL,
):
    """Reproduces the worked example: T1, T2 and the eigenvalue lambda = 3."""
    cfg = build_config(command="example8", rtol=rtol, atol=atol, tol=tol)
    report = run_example8(cfg)
    emit(report)
    return "example8", {"T1": report["T1"], "lambda_hat": report["lambda_hat"]}
