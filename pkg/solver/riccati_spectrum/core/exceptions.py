# solver/riccati_spectrum/core/exceptions.py

from typing import Any, Optional


class RiccatiSpectrumError(Exception):
    """Base class for every error raised by the solver. Carries a CLI exit code."""

    exit_code: int = 4

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context = context


# --- Coefficients (exit 2) ---
class CoefficientError(RiccatiSpectrumError):
    exit_code = 2


class TimeOutOfRange(CoefficientError):
    pass


class InvalidCoefficientFunction(CoefficientError):
    pass


class EnvelopeInfeasible(CoefficientError):
    pass


class ValidationFailed(RiccatiSpectrumError):
    exit_code = 2


# --- Numerics (exit 4) ---
class NumericalError(RiccatiSpectrumError):
    exit_code = 4


class StepSizeUnderflow(NumericalError):
    pass


class FloorReached(NumericalError):
    """The trajectory survived down to the integration floor."""

    def __init__(self, message: str, solution: Optional[Any] = None, **context: Any):
        super().__init__(message, **context)
        self.solution = solution


class DomainError(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass


class BracketInvalid(NumericalError):
    pass


class StructureChangedInsideBracket(NumericalError):
    pass


class ChainNotEigen(NumericalError):
    pass


# --- Oracle / acceptance (exit 3) ---
class OracleFailure(RiccatiSpectrumError):
    exit_code = 3


# --- Usage (exit 1) ---
class InvalidRunConfig(RiccatiSpectrumError):
    exit_code = 1
