# solver/riccati_spectrum/cli/commands/oracle.py

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np

from ...core.exceptions import OracleFailure
from ...schemas.riccati import IntegratorOptions, TerminationKind
from ...schemas.run_config import RunConfig
from ...services.riccati_service import (
    closed_form_blowup_time,
    closed_form_constant_riccati,
    integrate_scalar_riccati,
)
from .. import options
from ..deps import build_config, emit, tracked

logger = logging.getLogger(__name__)

ORACLE_SEED = 20240101
REL_TOL = 1e-8
BLOWUP_TOL = 1e-8
TAN_MARGIN = 0.1
SAMPLES_PER_CASE = 5


def oracle_cases(n: int, seed: int = ORACLE_SEED) -> List[tuple]:
    """(a, b, cq, t_bar) with b, cq > 0 and a positive discriminant 4 b cq - a^2."""
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < n:
        a = rng.uniform(-2.0, 2.0)
        b = rng.uniform(0.2, 4.0)
        cq = rng.uniform(0.2, 4.0)
        t_bar = rng.uniform(0.5, 3.0)
        if 4.0 * b * cq - a * a > 0.05:
            cases.append((float(a), float(b), float(cq), float(t_bar)))
    return cases


def check_case(a: float, b: float, cq: float, t_bar: float, opts: IntegratorOptions) -> Dict[str, float]:
    t_star = closed_form_blowup_time(a, b, cq, t_bar)
    omega = math.sqrt(4.0 * b * cq - a * a) / 2.0
    phase = math.atan(a / (2.0 * omega))
    s_max = (math.pi / 2.0 - TAN_MARGIN - phase) / omega

    solution = integrate_scalar_riccati(
        lambda t: a, lambda t: b, lambda t: cq, t_bar, 0.0, t_star - 1.0, opts
    )
    event = solution.termination
    if event.kind != TerminationKind.BLOWUP_PLUS_INF:
        return {"rel_error": math.inf, "blowup_error": math.inf}

    rel = 0.0
    if s_max > 0:
        for s in np.linspace(s_max / SAMPLES_PER_CASE, s_max, SAMPLES_PER_CASE):
            t = t_bar - float(s)
            exact = closed_form_constant_riccati(a, b, cq, t_bar, t)
            rel = max(rel, abs(solution.value_at(t) - exact) / max(1.0, abs(exact)))
    return {"rel_error": rel, "blowup_error": abs(event.t_star - t_star)}


def run_oracle(cfg: RunConfig) -> Dict[str, Any]:
    opts = cfg.integrator_options()
    max_rel, max_blowup, worst = 0.0, 0.0, None
    for case in oracle_cases(cfg.cases, ORACLE_SEED + cfg.seed):
        errors = check_case(*case, opts)
        if errors["rel_error"] > max_rel or errors["blowup_error"] > max_blowup:
            worst = case
        max_rel = max(max_rel, errors["rel_error"])
        max_blowup = max(max_blowup, errors["blowup_error"])
    passed = max_rel <= REL_TOL and max_blowup <= BLOWUP_TOL
    logger.info(
        f"Oracle over {cfg.cases} cases: max relative error {max_rel:.3e}, "
        f"max blow-up time error {max_blowup:.3e}."
    )
    return {
        "cases": cfg.cases,
        "max_rel_error": max_rel,
        "max_blowup_error": max_blowup,
        "rel_tol": REL_TOL,
        "blowup_tol": BLOWUP_TOL,
        "worst_case": worst,
        "passed": passed,
    }


@tracked("oracle")
def oracle_command(
    cases: int = options.CASES,
    seed: int = options.SEED,
    rtol: Optional[float] = options.RTOL,
    atol: Optional[float] = options.ATOL,
):
    """Compares the integrator with the constant-coefficient closed form."""
    cfg = build_config(command="oracle", cases=cases, seed=seed, rtol=rtol, atol=atol)
    report = run_oracle(cfg)
    emit(report)
    if not report["passed"]:
        raise OracleFailure(
            f"Oracle tolerance exceeded: relative {report['max_rel_error']:.3e}, "
            f"blow-up {report['max_blowup_error']:.3e}."
        )
    return None, {"max_rel_error": report["max_rel_error"], "max_blowup_error": report["max_blowup_error"]}
