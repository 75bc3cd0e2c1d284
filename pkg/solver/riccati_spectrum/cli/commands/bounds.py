# solver/riccati_spectrum/cli/commands/bounds.py

from pathlib import Path
from typing import Optional

from ...core.exceptions import InvalidRunConfig
from ...schemas.run_config import RunConfig
from ...schemas.spectrum import PeriodBounds
from ...services.spectrum_service import period_bounds
from .. import options
from ..deps import build_config, emit, load_system, tracked


def run_bounds(cfg: RunConfig) -> PeriodBounds:
    if cfg.m is None:
        raise InvalidRunConfig("bounds needs --m.")
    return period_bounds(load_system(cfg), cfg.m, opts=cfg.scan_options())


@tracked("bounds")
def bounds_command(
    config: Optional[Path] = options.CONFIG,
    system: Optional[str] = options.SYSTEM,
    m: Optional[int] = options.M,
):
    """Prints the lower and upper bounds on lambda_m from the envelope systems."""
    cfg = build_config(command="bounds", config_path=config, system=system, m=m)
    bounds = run_bounds(cfg)
    emit(bounds)
    return cfg.system_label, {"m": bounds.m, "lower": bounds.lower, "upper": bounds.upper}
