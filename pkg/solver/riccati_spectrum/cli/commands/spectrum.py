# solver/riccati_spectrum/cli/commands/spectrum.py

import logging
from pathlib import Path
from typing import Optional

from ...core.exceptions import InvalidRunConfig
from ...schemas.run_config import RunConfig
from ...schemas.spectrum import SpectrumResult
from ...services.spectrum_service import enumerate_eigenvalues
from ...utils.io import sidecar_path, write_csv, write_json
from .. import options
from ..deps import build_config, emit, load_system, tracked

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("order_index", "lambda", "bracket_lo", "bracket_hi", "defect", "chain_depth")


def run_spectrum(cfg: RunConfig) -> SpectrumResult:
    if cfg.lambda_max is None:
        raise InvalidRunConfig("spectrum needs --lambda-max.")
    c = load_system(cfg)
    result = enumerate_eigenvalues(
        c, cfg.lambda_max, opts=cfg.scan_options(), lambda_min=cfg.lambda_min
    )
    if cfg.out is None:
        return result
    if cfg.format == "json":
        write_json(cfg.out, result)
        return result
    rows = (
        (
            e.order_index,
            e.lam,
            e.bracket[0],
            e.bracket[1],
            e.defect_residual,
            e.chain.depth,
        )
        for e in result.eigenvalues
    )
    write_csv(cfg.out, SPECTRUM_COLUMNS, rows)
    write_json(
        sidecar_path(cfg.out, "chains.json"),
        {
            "lambda_b": result.lambda_b,
            "below_lambda_b": result.below_lambda_b,
            "chains": [e.chain for e in result.eigenvalues],
        },
    )
    return result


@tracked("spectrum")
def spectrum_command(
    config: Optional[Path] = options.CONFIG,
    system: Optional[str] = options.SYSTEM,
    lambda_max: Optional[float] = options.LAMBDA_MAX,
    lambda_min: Optional[float] = options.LAMBDA_MIN,
    tol: Optional[float] = options.TOL,
    rtol: Optional[float] = options.RTOL,
    atol: Optional[float] = options.ATOL,
    switch_threshold: Optional[float] = options.SWITCH,
    floor: Optional[float] = options.FLOOR,
    out: Optional[Path] = options.OUT,
    format: str = options.FORMAT,
):
    """Enumerates the eigenvalues up to --lambda-max."""
    cfg = build_config(
        command="spectrum",
        config_path=config,
        system=system,
        lambda_max=lambda_max,
        lambda_min=lambda_min,
        tol=tol,
        rtol=rtol,
        atol=atol,
        switch_threshold=switch_threshold,
        floor=floor,
        out=out,
        format=format,
    )
    result = run_spectrum(cfg)
    if cfg.out is None:
        emit(result)
    return cfg.system_label, {"eigenvalues": result.values}
