# solver/riccati_spectrum/cli/commands/validate.py

import logging
from pathlib import Path
from typing import Optional

from ...core.exceptions import ValidationFailed
from ...schemas.coefficients import ValidationReport
from ...schemas.run_config import RunConfig
from ...services.coeffs_service import validate
from .. import options
from ..deps import build_config, emit, load_system, tracked

logger = logging.getLogger(__name__)


def run_validate(cfg: RunConfig) -> ValidationReport:
    return validate(load_system(cfg))


@tracked("validate")
def validate_command(
    config: Optional[Path] = options.CONFIG,
    system: Optional[str] = options.SYSTEM,
):
    """Checks the structural assumptions and prints the report as JSON."""
    cfg = build_config(command="validate", config_path=config, system=system)
    report = run_validate(cfg)
    emit(report)
    if not report.structural_ok:
        raise ValidationFailed(
            f"{len(report.violations)} structural violation(s): "
            f"{', '.join(v.constraint for v in report.violations)}"
        )
    return cfg.system_label, {"lambda_b": report.lambda_b, "beta": report.beta}
