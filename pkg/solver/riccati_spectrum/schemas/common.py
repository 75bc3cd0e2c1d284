# solver/riccati_spectrum/schemas/common.py

from enum import Enum

from pydantic import BaseModel, ConfigDict


class FrozenModel(BaseModel):
    """Immutable record; `lam` fields also accept the `lambda` alias."""

    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        arbitrary_types_allowed=True,
        extra="forbid",
    )


class Representation(str, Enum):
    DIRECT = "direct"
    RECIPROCAL = "reciprocal"


class Equation(str, Enum):
    PRIMAL = "primal"
    DUAL = "dual"

