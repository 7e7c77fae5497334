"""Path, shape and marked-path value types."""

from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from itertools import accumulate, pairwise

from walklab.core.exceptions import ValidationError
from walklab.models.params import WalkParams


@dataclass(frozen=True, slots=True)
class PathZ:
    """A point of C_K: K+1 integer heights joined by unit steps."""

    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        heights = tuple(int(z) for z in self.heights)
        if len(heights) < 2:
            raise ValidationError(
                "A path needs at least two heights", {"heights": list(heights)}
            )
        for i, (a, b) in enumerate(pairwise(heights), start=1):
            if abs(b - a) != 1:
                raise ValidationError(
                    f"Step {i} is not a unit step",
                    {"heights": list(heights), "step": i},
                )
        object.__setattr__(self, "heights", heights)

    @classmethod
    def from_steps(cls, z1: int, steps: Iterable[int]) -> "PathZ":
        return cls(tuple(accumulate(steps, initial=z1)))

    @property
    def K(self) -> int:
        return len(self.heights) - 1

    @property
    def z1(self) -> int:
        return self.heights[0]

    @property
    def gap(self) -> int:
        """z_{K+1} - z_1; equals h for members of C_{K,h}."""
        return self.heights[-1] - self.heights[0]

    @property
    def steps(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in pairwise(self.heights))

    def shifted(self, offset: int) -> "PathZ":
        return PathZ(tuple(z + offset for z in self.heights))

    def anchored(self) -> "ShapeBar":
        return ShapeBar(self.shifted(-self.z1))

    def belongs_to(self, params: WalkParams) -> bool:
        return self.K == params.K and self.gap == params.h

    def __str__(self) -> str:
        return "(" + ",".join(str(z) for z in self.heights) + ")"


@dataclass(frozen=True, slots=True)
class StepShape:
    """Up/down step sequence of a path; lies in Sh_{K,h} when the steps sum to h."""

    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        steps = tuple(int(s) for s in self.steps)
        if not steps or any(s not in (-1, 1) for s in steps):
            raise ValidationError("Shape steps must be a non-empty +1/-1 sequence",
                                  {"steps": list(steps)})
        object.__setattr__(self, "steps", steps)

    @property
    def K(self) -> int:
        return len(self.steps)

    @property
    def h(self) -> int:
        return sum(self.steps)

    def to_path(self, z1: int = 0) -> PathZ:
        return PathZ.from_steps(z1, self.steps)


@dataclass(frozen=True, slots=True)
class ShapeBar:
    """Anchored representative (z1 = 0) of a path; a state of the shape chain."""

    path: PathZ

    def __post_init__(self) -> None:
        if self.path.z1 != 0:
            raise ValidationError(
                "Anchored shapes start at height 0", {"heights": list(self.path.heights)}
            )

    @classmethod
    def from_steps(cls, steps: Iterable[int]) -> "ShapeBar":
        return cls(PathZ.from_steps(0, steps))

    @property
    def steps(self) -> tuple[int, ...]:
        return self.path.steps

    @property
    def K(self) -> int:
        return self.path.K

    @property
    def h(self) -> int:
        return self.path.gap

    def at(self, z1: int) -> PathZ:
        """The member of C_{K,h} with this shape starting at height z1."""
        return self.path.shifted(z1)

    def step_shape(self) -> StepShape:
        return StepShape(self.steps)


@dataclass(frozen=True, slots=True)
class MotzkinPath:
    """Grand Motzkin path: K steps in {-1, 0, +1}; lies in M_{K,h} when they sum to h."""

    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        steps = tuple(int(s) for s in self.steps)
        if not steps or any(s not in (-1, 0, 1) for s in steps):
            raise ValidationError("Motzkin steps must be a non-empty -1/0/+1 sequence",
                                  {"steps": list(steps)})
        object.__setattr__(self, "steps", steps)

    @property
    def K(self) -> int:
        return len(self.steps)

    @property
    def h(self) -> int:
        return sum(self.steps)


class EndMark(str, Enum):
    """Horizontal end steps that may carry the mark in the unconstrained model."""

    INITIAL = "initial"
    FINAL = "final"


@dataclass(frozen=True, slots=True)
class MarkedPath:
    """A neighbour of `base` together with a distinguished non-crossing step.

    `mark` is a step index p in [1, K], or an EndMark for the horizontal
    steps added at both ends of the path in the unconstrained model.
    """

    base: PathZ
    neighbor: PathZ
    mark: int | EndMark

    @property
    def mark_height_index(self) -> int:
        """0-based height index whose displacement gives the mark's sign."""
        if self.mark is EndMark.INITIAL:
            return 0
        if self.mark is EndMark.FINAL:
            return self.base.K
        return int(self.mark) - 1

    @property
    def sign(self) -> int:
        """+1 when the marked step of the neighbour lies above the base path."""
        i = self.mark_height_index
        return self.neighbor.heights[i] - self.base.heights[i]


@dataclass(frozen=True, slots=True)
class CrossingProfile:
    """Crossing and non-crossing steps of a neighbour relative to a base path."""

    crossing_steps: tuple[int, ...]
    noncrossing_steps: tuple[tuple[int, int], ...]

    @property
    def area_change(self) -> int:
        """Sum of the non-crossing signs, which equals A(z') - A(z)."""
        return sum(sign for _, sign in self.noncrossing_steps)
