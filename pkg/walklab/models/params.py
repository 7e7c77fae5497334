"""Walk parameter model."""

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from walklab.core.exceptions import ValidationError


class WalkParams(BaseModel):
    """Step count K and pinned endpoint gap h of the state space C_{K,h}."""

    model_config = ConfigDict(frozen=True)

    K: int = Field(ge=1)
    h: int = Field(ge=0)

    @model_validator(mode="after")
    def check_gap(self) -> "WalkParams":
        """C_{K,h} is empty unless 0 <= h <= K and K - h is even."""
        if self.h > self.K:
            raise ValueError(f"gap h={self.h} exceeds step count K={self.K}")
        if (self.K - self.h) % 2:
            raise ValueError(f"K - h must be even (K={self.K}, h={self.h})")
        return self

    @property
    def g(self) -> int:
        """Number of down steps of every path."""
        return (self.K - self.h) // 2

    @property
    def walkers(self) -> int:
        return self.K + 1

    def label(self) -> str:
        return f"K={self.K},h={self.h}"


def make_params(K: int, h: int) -> WalkParams:
    """Build WalkParams, converting pydantic errors into the app's ValidationError."""
    try:
        return WalkParams(K=K, h=h)
    except PydanticValidationError as e:
        raise ValidationError(
            f"Invalid walk parameters K={K}, h={h}",
            {"errors": [err["msg"] for err in e.errors()]},
        ) from e


def admissible_gaps(K: int) -> list[int]:
    """All h with C_{K,h} non-empty, in increasing order."""
    return list(range(K % 2, K + 1, 2))
