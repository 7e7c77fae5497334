"""Path service: neighbourhoods, degrees, areas and crossings on C_{K,h}."""

import json
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from walklab.config import settings
from walklab.core.exceptions import CapacityError, ValidationError
from walklab.core.logging import log_with_context, logger
from walklab.models.params import WalkParams
from walklab.models.paths import CrossingProfile, PathZ, ShapeBar, StepShape

Displacement = tuple[int, ...]


def _slot(sign: int) -> int:
    return 0 if sign == 1 else 1


@dataclass(frozen=True, slots=True)
class DisplacementTable:
    """Counts of admissible displacement vectors d = z' - z for one shape.

    A displacement keeps its sign across step i unless the neighbour crosses
    the path there, which is only possible when d_i equals the step F_i.
    Each branch fixes d_1; branch rows[i] = (completions from d_{i+1} = +1,
    completions from d_{i+1} = -1). Pinned walks need d_{K+1} = d_1.
    """

    steps: tuple[int, ...]
    branches: tuple[tuple[int, tuple[tuple[int, int], ...]], ...]

    @classmethod
    def build(cls, steps: Sequence[int], pinned: bool = True) -> "DisplacementTable":
        steps = tuple(steps)
        if pinned:
            branches = ((1, _completions(steps, 1)), (-1, _completions(steps, -1)))
        else:
            free = _completions(steps, None)
            branches = ((1, free), (-1, free))
        return cls(steps, branches)

    def branch_size(self, sign: int) -> int:
        for d1, rows in self.branches:
            if d1 == sign:
                return rows[0][_slot(d1)]
        return 0

    @property
    def degree(self) -> int:
        return sum(rows[0][_slot(d1)] for d1, rows in self.branches)

    def decode(self, index: int) -> Displacement:
        """The index-th displacement: d_1 = +1 first, keeping the sign before switching."""
        for d1, rows in self.branches:
            size = rows[0][_slot(d1)]
            if index < size:
                break
            index -= size
        else:
            raise ValidationError(f"Neighbour index {index} out of range")

        current = d1
        displacement = [current]
        for i in range(len(self.steps)):
            stay = rows[i + 1][_slot(current)]
            if index >= stay:
                index -= stay
                current = -current
            displacement.append(current)
        return tuple(displacement)


def _completions(
    steps: tuple[int, ...], target: int | None
) -> tuple[tuple[int, int], ...]:
    rows = [(int(target in (None, 1)), int(target in (None, -1)))]
    for f in reversed(steps):
        up_next, down_next = rows[-1]
        rows.append((
            up_next + (down_next if f == 1 else 0),
            down_next + (up_next if f == -1 else 0),
        ))
    rows.reverse()
    return tuple(rows)


def twice_area_of(heights: Sequence[int]) -> int:
    """z_1 + 2(z_2 + ... + z_K) + z_{K+1}."""
    return 2 * sum(heights) - heights[0] - heights[-1]


def twice_area_change(displacement: Displacement) -> int:
    return twice_area_of(displacement)


def moved_steps(steps: Sequence[int], displacement: Displacement) -> tuple[int, ...]:
    """Steps of z + d: a step flips exactly where d changes sign."""
    return tuple(
        f if displacement[i] == displacement[i + 1] else -f for i, f in enumerate(steps)
    )


class PathService:
    """Service for the neighbourhood structure and areas of paths."""

    def shape_of(self, z: PathZ) -> StepShape:
        return StepShape(z.steps)

    def anchor(self, z: PathZ) -> ShapeBar:
        return z.anchored()

    def path_from_shape(self, z1: int, shape: StepShape | ShapeBar) -> PathZ:
        return PathZ.from_steps(z1, shape.steps)

    def displacement_table(self, z: PathZ, pinned: bool = True) -> DisplacementTable:
        return DisplacementTable.build(z.steps, pinned)

    def neighbors(self, z: PathZ, pinned: bool = True) -> list[PathZ]:
        """
        All neighbours of z.

        Args:
            z: Base path
            pinned: Keep the endpoint gap (C_{K,h}); False allows the two
                ends to move in opposite directions (C_K)

        Returns:
            Neighbours in deterministic order, up-moving first
        """
        table = self.displacement_table(z, pinned)
        return [self._apply(z, table.decode(u)) for u in range(table.degree)]

    def gamma_plus(self, z: PathZ, pinned: bool = True) -> list[PathZ]:
        table = self.displacement_table(z, pinned)
        return [self._apply(z, table.decode(u)) for u in range(table.branch_size(1))]

    def gamma_minus(self, z: PathZ, pinned: bool = True) -> list[PathZ]:
        table = self.displacement_table(z, pinned)
        start = table.branch_size(1)
        return [self._apply(z, table.decode(u)) for u in range(start, table.degree)]

    def degree(self, z: PathZ, pinned: bool = True) -> int:
        return self.displacement_table(z, pinned).degree

    def twice_area(self, z: PathZ) -> int:
        return twice_area_of(z.heights)

    def area(self, z: PathZ) -> Fraction:
        return Fraction(self.twice_area(z), 2)

    def twice_area_star(self, z: PathZ) -> int:
        """Twice the area under z extended by a horizontal unit step at each end."""
        return self.twice_area(z) + 2 * z.heights[0] + 2 * z.heights[-1]

    def coupling_defect(self, z: PathZ) -> Fraction:
        """f_K(z) = K z_1 + K^2/2 - A(z): area between z and the slope-one segment from z_1."""
        K = z.K
        return Fraction(2 * K * z.z1 + K * K - self.twice_area(z), 2)

    def coupling_defect_star(self, z: PathZ) -> Fraction:
        """Extended-path counterpart of coupling_defect with K + 2 steps."""
        width = z.K + 2
        return Fraction(2 * width * z.z1 + width * width - self.twice_area_star(z), 2)

    def displacement(self, z: PathZ, zp: PathZ, pinned: bool = True) -> Displacement:
        """d = zp - z, rejecting pairs that are not neighbours."""
        if zp.K != z.K:
            raise ValidationError(
                "Paths have different lengths", {"z": list(z.heights), "zp": list(zp.heights)}
            )
        d = tuple(b - a for a, b in zip(z.heights, zp.heights, strict=True))
        if any(abs(x) != 1 for x in d):
            raise ValidationError(
                "Some coordinate does not move by exactly one",
                {"z": list(z.heights), "zp": list(zp.heights)},
            )
        if pinned and zp.gap != z.gap:
            raise ValidationError(
                "Neighbour changes the endpoint gap",
                {"z": list(z.heights), "zp": list(zp.heights)},
            )
        return d

    def crossings(self, z: PathZ, zp: PathZ, pinned: bool = True) -> CrossingProfile:
        """
        Split the steps of zp into crossings of z and signed non-crossing steps.

        Args:
            z: Base path
            zp: A neighbour of z

        Returns:
            CrossingProfile with 1-based step indices; a non-crossing step has
            sign +1 when it lies above z
        """
        d = self.displacement(z, zp, pinned)
        crossing: list[int] = []
        noncrossing: list[tuple[int, int]] = []
        for p in range(1, z.K + 1):
            if d[p - 1] != d[p]:
                crossing.append(p)
            else:
                noncrossing.append((p, d[p - 1]))
        return CrossingProfile(tuple(crossing), tuple(noncrossing))

    def check_enumeration_cap(self, K: int) -> None:
        if K > settings.enumeration_cap:
            log_with_context(
                logger, logging.WARNING, "Enumeration cap exceeded",
                K=K, cap=settings.enumeration_cap,
            )
            raise CapacityError(
                f"K={K} exceeds the enumeration cap {settings.enumeration_cap}",
                cap=settings.enumeration_cap,
                requested=K,
            )

    def iter_shapes(self, params: WalkParams) -> Iterator[ShapeBar]:
        """Anchored shapes of Sh_{K,h} in lexicographic order of their steps (-1 < +1)."""
        for downs in combinations(range(params.K), params.g):
            steps = [1] * params.K
            for i in downs:
                steps[i] = -1
            yield ShapeBar.from_steps(steps)

    def enumerate_anchored(self, params: WalkParams) -> Iterator[PathZ]:
        """Every anchored member of C_{K,h}, subject to the enumeration cap."""
        self.check_enumeration_cap(params.K)
        for shape in self.iter_shapes(params):
            yield shape.path

    def enumerate_anchored_free(self, K: int) -> Iterator[PathZ]:
        """Every anchored member of C_K (all 2^K shapes), lexicographic order."""
        self.check_enumeration_cap(K)
        for steps in product((-1, 1), repeat=K):
            yield PathZ.from_steps(0, steps)

    def path_to_json(self, z: PathZ) -> str:
        return json.dumps(list(z.heights))

    def path_from_json(self, payload: str) -> PathZ:
        try:
            heights = json.loads(payload)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Invalid path JSON: {e}") from e
        if not isinstance(heights, list) or not all(
            isinstance(z, int) and not isinstance(z, bool) for z in heights
        ):
            raise ValidationError("A path must be a JSON array of integers")
        return PathZ(tuple(heights))

    def _apply(self, z: PathZ, d: Displacement) -> PathZ:
        return PathZ(tuple(a + b for a, b in zip(z.heights, d, strict=True)))


# Singleton instance
path_service = PathService()
