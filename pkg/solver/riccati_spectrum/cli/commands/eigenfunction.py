# solver/riccati_spectrum/cli/commands/eigenfunction.py

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import typer

from ...core.exceptions import ChainNotEigen, InvalidRunConfig
from ...schemas.coefficients import CoefficientSet
from ...schemas.run_config import RunConfig
from ...schemas.spectrum import Eigenvalue, RootKind, ScanOptions
from ...services.chain_service import compute_chain
from ...services.fbsde_service import bsde_residual, path_statistics, simulate_eigenfunction
from ...services.spectrum_service import enumerate_eigenvalues
from ...utils.io import sidecar_path, write_csv
from .. import options
from ..deps import build_config, emit, load_system, tracked

logger = logging.getLogger(__name__)

PATH_COLUMNS = ("t", "x", "y", "z", "segment_kind")


def resolve_eigenvalue(c: CoefficientSet, lam: float, opts: ScanOptions, defect_tol: float) -> Eigenvalue:
    """The eigenvalue at ``lam``, refined within a small window when its chain misses t = 0."""
    slack = max(opts.chain.zero_slack, 10.0 * opts.tol)
    chain = compute_chain(c, lam, opts=opts.chain.with_slack(slack))
    if chain.is_eigen(defect_tol):
        return Eigenvalue(
            order_index=1,
            lam=lam,
            bracket=(lam, lam),
            defect_residual=chain.termination.defect,
            chain=chain,
            method="defect_root",
            root_kind=RootKind.defect(),
        )
    width = 1e-3 * max(1.0, abs(lam))
    window = enumerate_eigenvalues(
        c, lam + width, opts.model_copy(update={"n_scan": 5}), lambda_min=lam - width
    )
    if not window.eigenvalues:
        raise ChainNotEigen(f"No eigenvalue within {width:.3g} of lambda={lam}.", lam=lam)
    eig = min(window.eigenvalues, key=lambda e: abs(e.lam - lam))
    logger.info(f"Refined lambda={lam} to the eigenvalue {eig.lam:.15g}.")
    return eig


def run_eigenfunction(cfg: RunConfig, per_path: bool = False) -> Dict[str, Any]:
    if cfg.lam is None:
        raise InvalidRunConfig("eigenfunction needs --lambda.")
    c = load_system(cfg)
    sim = cfg.simulation_options()
    eig = resolve_eigenvalue(c, cfg.lam, cfg.scan_options(), sim.defect_tol)
    path = simulate_eigenfunction(c, eig, opts=sim)
    residual = bsde_residual(path, c, eig.lam)

    if cfg.out is not None:
        kinds = [path.kind_at(i) for i in range(path.grid.size)]
        stats = path_statistics(path)
        write_csv(
            cfg.out,
            PATH_COLUMNS,
            zip(stats.grid, stats.x_mean, stats.y_mean, stats.z_mean, kinds),
        )
        if per_path:
            for p in range(path.n_paths):
                write_csv(
                    sidecar_path(cfg.out, f"path{p:04d}.csv"),
                    PATH_COLUMNS,
                    zip(path.grid, path.x[p], path.y[p], path.z[p], kinds),
                )
    return {
        "lambda": eig.lam,
        "n_paths": path.n_paths,
        "n_steps": int(path.dt.size),
        "seed": path.brownian_seed,
        "y0": path.y0,
        "segments": path.segments,
        "residual": residual,
    }


@tracked("eigenfunction")
def eigenfunction_command(
    config: Optional[Path] = options.CONFIG,
    system: Optional[str] = options.SYSTEM,
    lam: Optional[float] = options.LAMBDA,
    paths: Optional[int] = options.PATHS,
    steps: Optional[int] = options.STEPS,
    seed: int = options.SEED,
    y0: float = options.Y0,
    tol: Optional[float] = options.TOL,
    rtol: Optional[float] = options.RTOL,
    atol: Optional[float] = options.ATOL,
    out: Optional[Path] = options.OUT,
    per_path: bool = typer.Option(False, "--per-path", help="Also write one CSV per path."),
):
    """Simulates eigenfunction paths at an eigenvalue and reports the equation residuals."""
    cfg = build_config(
        command="eigenfunction",
        config_path=config,
        system=system,
        lam=lam,
        paths=paths,
        steps=steps,
        seed=seed,
        y0=y0,
        tol=tol,
        rtol=rtol,
        atol=atol,
        out=out,
    )
    report = run_eigenfunction(cfg, per_path=per_path)
    emit(report)
    return cfg.system_label, {"lambda": report["lambda"], "seed": cfg.seed}
