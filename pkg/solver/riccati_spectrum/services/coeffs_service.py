# solver/riccati_spectrum/services/coeffs_service.py

import logging
import math
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

import numpy as np
import orjson
from pydantic import ValidationError

from ..core.config import settings
from ..core.exceptions import EnvelopeInfeasible, InvalidCoefficientFunction
from ..schemas.coefficients import (
    COEFFICIENT_NAMES,
    CoefficientFn,
    CoefficientSet,
    EnvelopePair,
    Envelopes,
    ValidationReport,
    Violation,
)
from ..utils.piecewise import PiecewisePolynomial

logger = logging.getLogger(__name__)

_SYMMETRIC_PARTNERS = {"H12": "H21", "H31": "H13", "H32": "H23"}


# --- Evaluation ---
def evaluate(f: CoefficientFn, t):
    """
    Evaluates ``f`` at a time or an array of times.

    Times below 0 use the frozen value f(0); times beyond T raise TimeOutOfRange.
    """
    if np.ndim(t) == 0:
        return f(float(t))
    return f.evaluate(t)


# --- Set arithmetic ---
def product(f: CoefficientFn, g: CoefficientFn) -> CoefficientFn:
    return CoefficientFn.from_poly(f.poly * g.poly)


def linear_combination(*terms: Tuple[float, CoefficientFn]) -> CoefficientFn:
    """sum(weight * fn) on the union of knots."""
    if not terms:
        raise InvalidCoefficientFunction("linear_combination needs at least one term.")
    total: Optional[PiecewisePolynomial] = None
    for weight, fn in terms:
        scaled = fn.poly.scale(float(weight))
        total = scaled if total is None else total + scaled
    return CoefficientFn.from_poly(total)


def reciprocal(f: CoefficientFn) -> CoefficientFn:
    return CoefficientFn.from_poly(f.poly.reciprocal())


# --- Structural constants ---
def _grid(c: CoefficientSet, grid_n: Optional[int]) -> np.ndarray:
    return c.validation_grid(grid_n or settings.GRID_N)


def _monotonicity_margins(c: CoefficientSet, grid: np.ndarray) -> np.ndarray:
    """-lambda_max of the symmetrized structured matrix at every grid time."""
    v = {name: c.functions()[name].evaluate(grid) for name in COEFFICIENT_NAMES}
    M = np.empty((grid.size, 3, 3))
    M[:, 0, 0], M[:, 0, 1], M[:, 0, 2] = -v["H11"], -v["H12"], -v["H13"]
    M[:, 1, 0], M[:, 1, 1], M[:, 1, 2] = v["H21"], v["H22"], v["H23"]
    M[:, 2, 0], M[:, 2, 1], M[:, 2, 2] = v["H31"], v["H32"], v["H33"]
    sym = 0.5 * (M + np.swapaxes(M, 1, 2))
    return -np.linalg.eigvalsh(sym)[:, -1]


def monotonicity_beta(c: CoefficientSet, grid_n: Optional[int] = None) -> float:
    margins = _monotonicity_margins(c, _grid(c, grid_n))
    return max(0.0, float(np.min(margins)))


def constant_matrix_beta(matrix) -> float:
    """Monotonicity margin of one constant 3x3 coefficient matrix [[H11..],[H21..],[H31..]]."""
    H = np.asarray(matrix, dtype=float)
    M = H.copy()
    M[0] = -M[0]
    return max(0.0, float(-np.linalg.eigvalsh(0.5 * (M + M.T))[-1]))


def lambda_b(c: CoefficientSet, grid_n: Optional[int] = None) -> float:
    grid = _grid(c, grid_n)
    q0_min = float(np.min(c.reduced.q0.evaluate(grid)))
    h22_max = float(np.max(c.h22.evaluate(grid)))
    if h22_max >= 0:
        logger.warning(f"max h22 = {h22_max} is not negative; lambda_b is undefined.")
        return math.nan
    return q0_min / h22_max


def all_eigen_condition_from_norms(n11: float, nq: float, na: float, T: float) -> bool:
    """4 |H11| |q_b| <= |2H21 + H13^2|^2 < 4 / T^2."""
    return 4.0 * n11 * nq <= na * na < 4.0 / (T * T)


def _sup_norms(c: CoefficientSet, grid: np.ndarray, lam_b: float) -> Tuple[float, float, float]:
    red = c.reduced
    n11 = float(np.max(np.abs(red.b.evaluate(grid))))
    nq = float(np.max(np.abs(red.q0.evaluate(grid) - lam_b * red.h22.evaluate(grid))))
    na = float(np.max(np.abs(red.a.evaluate(grid))))
    return n11, nq, na


def check_all_eigen_condition(c: CoefficientSet, grid_n: Optional[int] = None) -> bool:
    grid = _grid(c, grid_n)
    lam_b = lambda_b(c, grid_n)
    if math.isnan(lam_b):
        return False
    return all_eigen_condition_from_norms(*_sup_norms(c, grid, lam_b), c.T)


def uniqueness_constant(c: CoefficientSet, grid_n: Optional[int] = None) -> float:
    max_h13 = float(np.max(np.abs(c.H13.evaluate(_grid(c, grid_n)))))
    return 1.0 / (2.0 * (max_h13 + 1.0) ** 2)


# --- Validation ---
def _worst(grid, excess, constraint: str) -> Optional[Violation]:
    """One violation at the time where ``excess`` is largest, if it is positive."""
    i = int(np.argmax(excess))
    if excess[i] <= 0:
        return None
    return Violation(time=float(grid[i]), constraint=constraint, magnitude=float(excess[i]))


def validate(c: CoefficientSet, grid_n: Optional[int] = None) -> ValidationReport:
    grid = _grid(c, grid_n)
    fns = c.functions()
    tol = settings.STRUCTURAL_TOL

    margins = _monotonicity_margins(c, grid)
    beta = max(0.0, float(np.min(margins)))

    structural = [
        _worst(
            grid,
            np.abs(fns["H23"].evaluate(grid) + fns["H33"].evaluate(grid) * fns["H13"].evaluate(grid))
            - tol,
            "H23 = -H33*H13",
        ),
        _worst(grid, fns["h22"].evaluate(grid), "h22 < 0"),
        _worst(grid, -margins, "monotonicity beta > 0"),
    ]
    violations = [v for v in structural if v is not None]

    symmetry = [
        _worst(
            grid,
            np.abs(fns[a].evaluate(grid) - fns[b].evaluate(grid)) - tol,
            f"{a} = {b}",
        )
        for a, b in _SYMMETRIC_PARTNERS.items()
    ]
    symmetry_warnings = [v for v in symmetry if v is not None]
    for w in symmetry_warnings:
        logger.info(f"Asymmetric coefficients: {w.constraint} off by {w.magnitude:.3e} at t={w.time}")

    lam_b = lambda_b(c, grid_n)
    all_eigen = (
        False
        if math.isnan(lam_b)
        else all_eigen_condition_from_norms(*_sup_norms(c, grid, lam_b), c.T)
    )
    report = ValidationReport(
        beta=beta,
        lambda_b=lam_b,
        structural_ok=not violations,
        all_eigen_condition_ok=all_eigen,
        grid_size=int(grid.size),
        violations=violations,
        symmetry_warnings=symmetry_warnings,
        uniqueness_constant=uniqueness_constant(c, grid_n),
        below_lambda_b="NONE" if all_eigen else "UNKNOWN",
    )
    if violations:
        logger.warning(
            f"Coefficient set failed validation: {[v.constraint for v in violations]}"
        )
    return report


# --- Envelopes ---
def _pair(values: np.ndarray, margin: Optional[float]) -> EnvelopePair:
    lo, hi = float(np.min(values)), float(np.max(values))
    if margin is None:
        margin = settings.ENVELOPE_MARGIN_REL * max(1.0, float(np.max(np.abs(values))))
    return EnvelopePair(lower=lo - margin, upper=hi + margin)


def envelopes(
    c: CoefficientSet, grid_n: Optional[int] = None, margin: Optional[float] = None
) -> Envelopes:
    if margin is not None and margin <= 0:
        raise EnvelopeInfeasible(f"Envelope margin must be positive, got {margin}.")
    grid = _grid(c, grid_n)
    fns = c.functions()
    pairs: Dict[str, EnvelopePair] = {
        name: _pair(fns[name].evaluate(grid), margin)
        for name in ("H11", "H12", "H21", "H22", "H31", "H32", "H33", "h22")
    }
    h13 = _pair(np.abs(fns["H13"].evaluate(grid)), margin)
    pairs["H13_abs"] = EnvelopePair(lower=max(0.0, h13.lower), upper=h13.upper)

    if pairs["H11"].lower <= 0:
        low = float(np.min(fns["H11"].evaluate(grid)))
        if low <= 0:
            raise EnvelopeInfeasible(
                f"H11 reaches {low} on the grid; no positive lower envelope exists.",
                coefficient="H11",
            )
        logger.info(f"Lower envelope of H11 clamped from {pairs['H11'].lower} to {0.5 * low}.")
        pairs["H11"] = pairs["H11"].model_copy(update={"lower": 0.5 * low})
    for name in ("H22", "H33", "h22"):
        if pairs[name].upper >= 0:
            high = float(np.max(fns[name].evaluate(grid)))
            if high >= 0:
                raise EnvelopeInfeasible(
                    f"{name} reaches {high} on the grid; no negative upper envelope exists.",
                    coefficient=name,
                )
            logger.info(f"Upper envelope of {name} clamped from {pairs[name].upper} to {0.5 * high}.")
            pairs[name] = pairs[name].model_copy(update={"upper": 0.5 * high})
    return Envelopes(grid_size=int(grid.size), **pairs)


def envelope_system(
    c: CoefficientSet,
    side: Literal["faster", "slower", "slower_auxiliary"],
    H_under_22: Optional[float] = None,
    env: Optional[Envelopes] = None,
) -> CoefficientSet:
    """
    Constant systems that sandwich the spectrum of ``c``.

    * ``faster``: lower envelopes with the upper H33 and h22; eigenvalues bound λ_m above.
    * ``slower``: upper envelopes with the lower H33 and h22; eigenvalues bound λ_m below.
    * ``slower_auxiliary``: the slower system with H22 = h22 = H_under_22. Its
      eigenvalues map to the slower ones through ``slower_relation``.
    """
    env = env or envelopes(c)
    if side == "faster":
        values = dict(
            H11=env.H11.lower,
            H12=env.H12.lower,
            H13=env.H13_abs.lower,
            H21=env.H21.lower,
            H22=env.H22.lower,
            H23=env.H23_check,
            H31=env.H31.lower,
            H32=env.H32.lower,
            H33=env.H33.upper,
            h22=env.h22.upper,
        )
    elif side in ("slower", "slower_auxiliary"):
        values = dict(
            H11=env.H11.upper,
            H12=env.H12.upper,
            H13=env.H13_abs.upper,
            H21=env.H21.upper,
            H22=env.H22.upper,
            H23=env.H23_hat,
            H31=env.H31.upper,
            H32=env.H32.upper,
            H33=env.H33.lower,
            h22=env.h22.lower,
        )
        if side == "slower_auxiliary":
            if H_under_22 is None:
                raise EnvelopeInfeasible("slower_auxiliary needs H_under_22.")
            values["H22"] = values["h22"] = float(H_under_22)
    else:
        raise ValueError(f"Unknown envelope side: {side}")
    return CoefficientSet.constant(c.T, **values)


def slower_relation(lam_under: float, env: Envelopes, H_under_22: float) -> float:
    """Maps an eigenvalue of the auxiliary slower system to one of the slower system."""
    h_check = env.h22.lower
    return (env.H22.upper - H_under_22) / h_check + (H_under_22 / h_check) * lam_under


# --- Loading ---
def _parse_fn(name: str, raw: Any, T: float) -> CoefficientFn:
    if isinstance(raw, (int, float)):
        raw = {"kind": "constant", "values": [raw]}
    if not isinstance(raw, dict):
        raise InvalidCoefficientFunction(f"{name} must be an object or a number.")
    raw = dict(raw)
    if raw.get("kind") == "constant" and "knots" not in raw:
        raw["knots"] = [0.0, T]
    try:
        return CoefficientFn.model_validate(raw)
    except ValidationError as e:
        raise InvalidCoefficientFunction(f"Invalid coefficient {name}: {e}") from e


def load_coefficient_set(source: Union[str, Path, Dict[str, Any]]) -> CoefficientSet:
    """
    Loads a coefficient set from a JSON file or an already parsed document.

    A missing H23 is synthesized as -H33*H13 exactly; missing H12, H31 and H32
    default to their symmetric partners H21, H13 and H23.
    """
    if isinstance(source, (str, Path)):
        try:
            doc = orjson.loads(Path(source).read_bytes())
        except (OSError, orjson.JSONDecodeError) as e:
            raise InvalidCoefficientFunction(f"Could not read coefficient file {source}: {e}") from e
    else:
        doc = dict(source)
    if not isinstance(doc, dict):
        raise InvalidCoefficientFunction("Coefficient document must be a JSON object.")

    unknown = set(doc) - set(COEFFICIENT_NAMES) - {"T"}
    if unknown:
        raise InvalidCoefficientFunction(f"Unknown keys in coefficient document: {sorted(unknown)}")
    if "T" not in doc:
        raise InvalidCoefficientFunction("Coefficient document needs the horizon T.")
    T = float(doc["T"])
    if not (math.isfinite(T) and T > 0):
        raise InvalidCoefficientFunction(f"T must be positive and finite, got {doc['T']}.")

    required = ("H11", "H13", "H21", "H22", "H33", "h22")
    missing = [name for name in required if name not in doc]
    if missing:
        raise InvalidCoefficientFunction(f"Missing coefficients: {missing}")

    fns = {name: _parse_fn(name, doc[name], T) for name in COEFFICIENT_NAMES if name in doc}
    if "H23" not in fns:
        fns["H23"] = CoefficientFn.from_poly(-(fns["H33"].poly * fns["H13"].poly))
        logger.info("H23 not given; synthesized as -H33*H13.")
    for name, partner in _SYMMETRIC_PARTNERS.items():
        if name not in fns:
            fns[name] = fns[partner]
    try:
        return CoefficientSet(T=T, **fns)
    except ValidationError as e:
        raise InvalidCoefficientFunction(f"Invalid coefficient set: {e}") from e


def dump_coefficient_set(c: CoefficientSet) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"T": c.T}
    for name, fn in c.functions().items():
        doc[name] = fn.model_dump(exclude_none=True)
    return doc
