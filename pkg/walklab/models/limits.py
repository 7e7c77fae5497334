"""Lazy-walk distributions and scan rows."""

import math
from dataclasses import dataclass
from fractions import Fraction

from walklab.core.exceptions import ValidationError


@dataclass(frozen=True)
class LazyWalkPMF:
    """Exact law of S_n, the sum of n steps uniform on {-1, 0, +1}.

    counts[x + n] is the number of step sequences reaching x, so
    P[S_n = x] = counts[x + n] / 3**n.
    """

    n: int
    counts: tuple[int, ...]

    def count(self, x: int) -> int:
        if abs(x) > self.n:
            return 0
        return self.counts[x + self.n]

    def probability(self, x: int) -> Fraction:
        return Fraction(self.count(x), 3**self.n)

    @property
    def probs(self) -> dict[int, Fraction]:
        return {x: self.probability(x) for x in range(-self.n, self.n + 1)}


@dataclass(frozen=True)
class HRule:
    """How the endpoint gap h depends on K in a scan: fixed, or floor(K**alpha)."""

    fixed: int | None = None
    alpha: float | None = None

    def __post_init__(self) -> None:
        if (self.fixed is None) == (self.alpha is None):
            raise ValidationError("An h rule needs exactly one of a fixed h or an exponent")
        if self.fixed is not None and self.fixed < 0:
            raise ValidationError(f"Fixed gap must be non-negative, got {self.fixed}")
        if self.alpha is not None and not 0 <= self.alpha <= 1:
            raise ValidationError(f"Exponent must lie in [0, 1], got {self.alpha}")

    def gap_for(self, K: int) -> int | None:
        """Admissible h for this K, or None when the rule has no valid gap."""
        if self.fixed is not None:
            if self.fixed > K or (K - self.fixed) % 2:
                return None
            return self.fixed
        assert self.alpha is not None
        h = math.floor(K**self.alpha + 1e-9)
        if (K - h) % 2:
            h = h - 1 if h > 0 else 1
        return h if 0 <= h <= K else None

    def __str__(self) -> str:
        return f"h={self.fixed}" if self.fixed is not None else f"alpha={self.alpha}"


@dataclass(frozen=True)
class ScanRow:
    K: int
    h: int
    sigma2: Fraction
    u_K: Fraction | None = None

    @property
    def K_times_sigma2(self) -> float:
        return float(self.K * self.sigma2)
