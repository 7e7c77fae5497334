"""Limit service: the lazy walk S_n and the asymptotics of the variance."""

import logging
import math
from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from fractions import Fraction

from walklab.core.exceptions import ValidationError
from walklab.core.logging import log_with_context, logger
from walklab.models.limits import HRule, LazyWalkPMF, ScanRow
from walklab.models.params import WalkParams
from walklab.models.reports import InequalityReport, LLTConstantReport, LowerBoundReport
from walklab.services.enumeration_service import (
    EnumerationService,
    binomial,
    enumeration_service,
)

DEFAULT_ALPHAS = (0.25, 0.5, 0.7, 0.75, 0.8)
DEFAULT_CHECKPOINTS = (10, 50, 100, 200, 400, 500)


def lazy_rows(n_max: int) -> Iterator[LazyWalkPMF]:
    """Exact laws of S_0, S_1, ..., S_{n_max}, one convolution per row."""
    if n_max < 0:
        raise ValidationError(f"Step count must be non-negative, got {n_max}")
    counts = [1]
    yield LazyWalkPMF(0, (1,))
    for n in range(1, n_max + 1):
        padded = [0, 0, *counts, 0, 0]
        counts = [padded[i] + padded[i + 1] + padded[i + 2] for i in range(2 * n + 1)]
        yield LazyWalkPMF(n, tuple(counts))


def _u_ratio(K: int, c0: int, c1: int) -> Fraction:
    return Fraction(2 * c0, (K + 2) * (c0 - c1))


def _llt_sigma2(pmf: LazyWalkPMF, h: int) -> Fraction:
    return Fraction(pmf.count(h + 1) + pmf.count(h - 1), pmf.n * pmf.count(h))


class LimitService:
    """Service for the lazy-walk rewriting of the variance and its asymptotics."""

    def __init__(self, enumeration: EnumerationService = enumeration_service) -> None:
        self.enumeration = enumeration

    def lazy_pmf(self, n: int) -> LazyWalkPMF:
        """P[S_n = x] for every x in [-n, n], exactly."""
        return deque(lazy_rows(n), maxlen=1)[0]

    def sigma2_via_llt(self, params: WalkParams) -> Fraction:
        """(1/K) (P[S_K = h+1] + P[S_K = h-1]) / P[S_K = h]."""
        return _llt_sigma2(self.lazy_pmf(params.K), params.h)

    def asymptotic_ratio_scan(
        self, rule: HRule, K_max: int, K_min: int = 1
    ) -> list[ScanRow]:
        """
        Exact sigma^2_{K,h(K)} for K_min <= K <= K_max.

        Args:
            rule: Fixed gap or h = floor(K**alpha) (parity-adjusted)
            K_max: Largest K
            K_min: Smallest K

        Returns:
            One row per K whose rule yields an admissible gap; u_K is filled
            for h = 0
        """
        if K_max < K_min or K_min < 1:
            raise ValidationError(f"Invalid scan range [{K_min}, {K_max}]")
        rows: list[ScanRow] = []
        for pmf in lazy_rows(K_max):
            K = pmf.n
            if K < K_min:
                continue
            h = rule.gap_for(K)
            if h is None:
                continue
            u_K = _u_ratio(K, pmf.count(0), pmf.count(1)) if h == 0 else None
            rows.append(ScanRow(K=K, h=h, sigma2=_llt_sigma2(pmf, h), u_K=u_K))
        log_with_context(
            logger, logging.INFO, "Ratio scan finished", rule=str(rule), K_max=K_max, rows=len(rows)
        )
        return rows

    def inequality_ii_check(self, K_max: int) -> InequalityReport:
        """P[S_K = 1] < P[S_K = 0] for every even 2 <= K <= K_max."""
        violations: list[int] = []
        checked = 0
        for pmf in lazy_rows(K_max):
            if pmf.n < 2 or pmf.n % 2:
                continue
            checked += 1
            if pmf.count(1) >= pmf.count(0):
                violations.append(pmf.n)
        if violations:
            log_with_context(logger, logging.ERROR, "Upper bound fails", K=violations[0])
        return InequalityReport(K_max=K_max, checked=checked, violations=violations)

    def inequality_iii_check(
        self, K_max: int, checkpoints: Iterable[int] = DEFAULT_CHECKPOINTS
    ) -> LowerBoundReport:
        """
        sigma^2_{K,0} > 2/(K+2) over even K, i.e. (K+2) P[S_K=1] > K P[S_K=0].

        Returns:
            The smallest even K from which the bound holds through K_max, the
            violating K, and u_K at the even checkpoints not beyond K_max
        """
        marks = {k for k in checkpoints if k % 2 == 0 and 2 <= k <= K_max}
        violations: list[int] = []
        u_table: dict[int, float] = {}
        last_even: int | None = None
        for pmf in lazy_rows(K_max):
            K = pmf.n
            if K < 2 or K % 2:
                continue
            last_even = K
            c0, c1 = pmf.count(0), pmf.count(1)
            if (K + 2) * c1 <= K * c0:
                violations.append(K)
            if K in marks:
                u_table[K] = float(_u_ratio(K, c0, c1))

        if last_even is None:
            first = None
        elif violations and violations[-1] == last_even:
            first = None
        else:
            first = violations[-1] + 2 if violations else 2
        if violations:
            log_with_context(
                logger, logging.WARNING, "Lower bound fails", K_max=K_max, violations=violations[:5]
            )
        return LowerBoundReport(
            K_max=K_max, first_K_holding=first, violations=violations, u_table=u_table
        )

    def gaussian_llt(self, n: int, x: int) -> float:
        """Gaussian approximation sqrt(3) exp(-3x^2/(4n)) / (2 sqrt(pi n)) of P[S_n = x]."""
        if n < 1:
            raise ValidationError(f"Step count must be positive, got {n}")
        return math.sqrt(3) * math.exp(-3 * x * x / (4 * n)) / (2 * math.sqrt(math.pi * n))

    def empirical_llt_constant(self, n_min: int = 50, n_max: int = 200) -> LLTConstantReport:
        """max_x n^{3/2} |P[S_n = x] - gaussian_llt(n, x)| for each n_min <= n <= n_max."""
        if not 1 <= n_min <= n_max:
            raise ValidationError(f"Invalid range [{n_min}, {n_max}]")
        per_n: dict[int, float] = {}
        for pmf in lazy_rows(n_max):
            n = pmf.n
            if n < n_min:
                continue
            total = 3**n
            per_n[n] = n**1.5 * max(
                abs(pmf.count(x) / total - self.gaussian_llt(n, x)) for x in range(-n, n + 1)
            )
        return LLTConstantReport(
            n_min=n_min, n_max=n_max, per_n=per_n, maximum=max(per_n.values())
        )

    def sigma2_star(self, K: int) -> Fraction:
        """Variance 2/(K+2) of the walk whose ends are free."""
        if K < 1:
            raise ValidationError(f"K must be positive, got {K}")
        return Fraction(2, K + 2)

    def sigma2_star_bruteforce(self, K: int) -> Fraction:
        """(1/(K+2)) A*_K / B*_K with A*_K = 2 sum_{Gamma+} dA* and B*_K = 2 * 3^K."""
        total = self.enumeration.total_area_sum_star_bruteforce(K)
        return Fraction(2 * total, (K + 2) * 2 * 3**K)

    def mixture_variance(self, K: int, n0_pmf: Mapping[int, Fraction]) -> Fraction:
        """2 sum_l P[N_0 = l] / (K + 2 - l)."""
        if any(not 0 <= zeros <= K for zeros in n0_pmf):
            raise ValidationError(f"Zero-count law must be supported on [0, {K}]")
        if any(p < 0 for p in n0_pmf.values()):
            raise ValidationError("Zero-count law has a negative mass")
        if sum(n0_pmf.values(), Fraction(0)) != 1:
            raise ValidationError("Zero-count law does not sum to 1")
        return 2 * sum(
            (Fraction(p) / (K + 2 - zeros) for zeros, p in n0_pmf.items()), Fraction(0)
        )

    def zero_count_pmf_uniform(self, K: int) -> dict[int, Fraction]:
        """Law of the number of flat steps in a uniform {-1, 0, +1}^K shape."""
        return {
            zeros: Fraction(binomial(K, zeros) * 2 ** (K - zeros), 3**K)
            for zeros in range(K + 1)
        }


# Singleton instance
limit_service = LimitService()
