# solver/riccati_spectrum/cli/commands/classify.py

from pathlib import Path
from typing import Any, Dict, Optional

from ...core.exceptions import InvalidRunConfig
from ...schemas.run_config import RunConfig
from ...services.spectrum_service import classify_period, period_bounds
from .. import options
from ..deps import build_config, emit, load_system, tracked


def run_classify(cfg: RunConfig) -> Dict[str, Any]:
    if cfg.lam is None or cfg.m is None:
        raise InvalidRunConfig("classify needs --lambda and --m.")
    c = load_system(cfg)
    opts = cfg.scan_options()
    bounds = period_bounds(c, cfg.m, opts=opts)
    return {
        "lambda": cfg.lam,
        "m": cfg.m,
        "class": classify_period(c, cfg.lam, cfg.m, opts=opts),
        "lower": bounds.lower,
        "upper": bounds.upper,
    }


@tracked("classify")
def classify_command(
    config: Optional[Path] = options.CONFIG,
    system: Optional[str] = options.SYSTEM,
    lam: Optional[float] = options.LAMBDA,
    m: Optional[int] = options.M,
):
    """Compares lambda with the period bounds of index m."""
    cfg = build_config(command="classify", config_path=config, system=system, lam=lam, m=m)
    report = run_classify(cfg)
    emit(report)
    return cfg.system_label, {"class": report["class"].value}
