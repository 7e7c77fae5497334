"""Shape-chain, trajectory and variance result types."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from walklab.models.params import WalkParams
from walklab.models.paths import ShapeBar


class Move(NamedTuple):
    """One neighbour of an anchored shape seen from the shape chain."""

    target: int
    dz1: int
    twice_area_change: int


@dataclass(frozen=True)
class ShapeChainModel:
    """Quotient chain on anchored shapes with exact transition probabilities."""

    params: WalkParams
    states: tuple[ShapeBar, ...]
    deg_s: tuple[int, ...]
    moves: tuple[tuple[Move, ...], ...]
    transition: tuple[dict[int, Fraction], ...]
    index: dict[tuple[int, ...], int] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.states)

    def degree(self, state: int) -> int:
        """Degree in C_{K,h} of any path with this shape (deg_S + 1)."""
        return self.deg_s[state] + 1

    def state_of(self, steps: tuple[int, ...]) -> int:
        return self.index[steps]


@dataclass(frozen=True)
class StationaryMeasure:
    """Exact stationary weights of a shape chain."""

    weights: tuple[Fraction, ...]

    def __getitem__(self, state: int) -> Fraction:
        return self.weights[state]

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))


@dataclass(frozen=True)
class ExactVariance:
    """sigma^2_{K,h} from the stationary expectation and from the closed form."""

    params: WalkParams
    stationary: Fraction
    closed_form: Fraction

    @property
    def value(self) -> Fraction:
        return self.closed_form


class TrajectorySample(NamedTuple):
    step: int
    z1: int
    twice_area: int


@dataclass(frozen=True)
class Trajectory:
    """Recorded states of one simulated walk."""

    params: WalkParams
    seed: int
    n: int
    stride: int
    samples: tuple[TrajectorySample, ...]
    unconstrained: bool = False


@dataclass(frozen=True)
class VarianceEstimate:
    """Monte Carlo estimate of the variance of Z_{n,1}/sqrt(n)."""

    params: WalkParams
    n: int
    replicas: int
    base_seed: int
    estimate: float
    std_error: float
    half_time_covariance: float
    finals: tuple[int, ...] = field(repr=False)
    unconstrained: bool = False

    def z_score(self, exact: Fraction) -> float:
        if self.std_error == 0:
            return 0.0 if self.estimate == float(exact) else float("inf")
        return (self.estimate - float(exact)) / self.std_error
