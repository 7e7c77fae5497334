"""Simulation service: seeded Monte Carlo runs of the multi-walker chain."""

import logging
import math
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from fractions import Fraction
from functools import lru_cache
from typing import Literal, NamedTuple

from scipy.stats import chi2

from walklab.config import settings
from walklab.core.exceptions import SimulationError, ValidationError
from walklab.core.logging import log_with_context, logger
from walklab.models.chain import Trajectory, TrajectorySample, VarianceEstimate
from walklab.models.params import WalkParams
from walklab.models.reports import FrequencyCheckReport, MartingaleCheckReport
from walklab.services.chain_service import ChainService, chain_service
from walklab.services.path_service import (
    DisplacementTable,
    moved_steps,
    twice_area_change,
    twice_area_of,
)
from walklab.utils.sampling import BoundedSampler, derive_seed, make_generator

InitialShape = Literal["default", "uniform"]

StepMove = tuple[tuple[int, ...], int, int]


@lru_cache(maxsize=settings.shape_cache_size)
def _table(steps: tuple[int, ...], pinned: bool) -> DisplacementTable:
    return DisplacementTable.build(steps, pinned)


@lru_cache(maxsize=settings.shape_cache_size)
def _memo_moves(steps: tuple[int, ...], pinned: bool) -> tuple[StepMove, ...] | None:
    table = _table(steps, pinned)
    if table.degree > settings.move_memo_limit:
        return None
    moves = []
    for u in range(table.degree):
        d = table.decode(u)
        moves.append((moved_steps(steps, d), d[0], twice_area_change(d)))
    return tuple(moves)


def initial_steps(
    params: WalkParams,
    sampler: BoundedSampler,
    initial: InitialShape = "default",
    unconstrained: bool = False,
) -> tuple[int, ...]:
    """Starting shape: g downs then ups, or uniform over Sh_{K,h} (or {-1,+1}^K)."""
    K, g = params.K, params.g
    if initial == "default":
        return (-1,) * g + (1,) * (K - g)
    if initial != "uniform":
        raise ValidationError(f"Unknown initial shape option: {initial}")
    if unconstrained:
        return tuple(2 * sampler.below(2) - 1 for _ in range(K))
    steps = [-1] * g + [1] * (K - g)
    sampler.shuffle(steps)
    return tuple(steps)


class Walker:
    """One walk of Z_n, kept as (shape, z_1, twice the area)."""

    __slots__ = ("steps", "z1", "twice_area", "pinned", "sampler")

    def __init__(
        self,
        steps: tuple[int, ...],
        sampler: BoundedSampler,
        z1: int = 0,
        pinned: bool = True,
    ) -> None:
        heights = [z1]
        for f in steps:
            heights.append(heights[-1] + f)
        self.steps = steps
        self.z1 = z1
        self.twice_area = twice_area_of(heights)
        self.pinned = pinned
        self.sampler = sampler

    def step(self) -> None:
        """Move to a uniformly chosen neighbour."""
        moves = _memo_moves(self.steps, self.pinned)
        if moves is not None:
            steps, dz1, dta = moves[self.sampler.below(len(moves))]
        else:
            table = _table(self.steps, self.pinned)
            d = table.decode(self.sampler.below(table.degree))
            steps, dz1, dta = moved_steps(self.steps, d), d[0], twice_area_change(d)
        self.steps = steps
        self.z1 += dz1
        self.twice_area += dta


def start_walker(
    params: WalkParams,
    seed: int,
    initial: InitialShape = "default",
    unconstrained: bool = False,
) -> Walker:
    sampler = BoundedSampler(make_generator(seed), settings.random_block_size)
    steps = initial_steps(params, sampler, initial, unconstrained)
    return Walker(steps, sampler, pinned=not unconstrained)


class _BatchJob(NamedTuple):
    K: int
    h: int
    n: int
    base_seed: int
    start: int
    stop: int
    initial: InitialShape
    unconstrained: bool


def _replica_endpoints(job: _BatchJob, replica: int) -> tuple[int, int]:
    params = WalkParams(K=job.K, h=job.h)
    walker = start_walker(params, derive_seed(job.base_seed, replica), job.initial, job.unconstrained)
    half = job.n // 2
    z_half = walker.z1
    for t in range(1, job.n + 1):
        walker.step()
        if t == half:
            z_half = walker.z1
    return z_half, walker.z1


def _run_batch(job: _BatchJob) -> list[tuple[int, int]]:
    return [_replica_endpoints(job, r) for r in range(job.start, job.stop)]


def _sample_moments(xs: Sequence[int], ys: Sequence[int]) -> Fraction:
    """Unbiased sample covariance of two integer samples, exactly."""
    count = len(xs)
    sx, sy = sum(xs), sum(ys)
    sxy = sum(x * y for x, y in zip(xs, ys, strict=True))
    return Fraction(count * sxy - sx * sy, count * (count - 1))


class SimulationService:
    """Service for Monte Carlo runs and simulated consistency checks."""

    def __init__(self, chain: ChainService = chain_service) -> None:
        self.chain = chain

    def simulate(
        self,
        params: WalkParams,
        n: int,
        seed: int,
        record_stride: int = 1,
        initial: InitialShape = "default",
        unconstrained: bool = False,
    ) -> Trajectory:
        """
        Run one walk of n steps from z_1 = 0.

        Args:
            params: Walk parameters (h fixes the initial gap when unconstrained)
            n: Number of steps
            seed: 64-bit seed; the same seed gives the same trajectory
            record_stride: Record every stride-th step (step 0 and step n always)
            initial: "default" (g downs then ups) or "uniform" over shapes
            unconstrained: Let the two endpoints move apart (chain on C_K)

        Returns:
            Recorded (step, z_1, twice area) samples
        """
        if n < 1:
            raise ValidationError(f"Step count must be positive, got {n}")
        if record_stride < 1:
            raise ValidationError(f"Record stride must be positive, got {record_stride}")

        walker = start_walker(params, seed, initial, unconstrained)
        samples = [TrajectorySample(0, walker.z1, walker.twice_area)]
        for t in range(1, n + 1):
            walker.step()
            if t % record_stride == 0 or t == n:
                samples.append(TrajectorySample(t, walker.z1, walker.twice_area))

        log_with_context(
            logger, logging.INFO, "Simulated trajectory",
            params=params.label(), n=n, seed=seed, recorded=len(samples),
        )
        return Trajectory(
            params=params,
            seed=seed,
            n=n,
            stride=record_stride,
            samples=tuple(samples),
            unconstrained=unconstrained,
        )

    def estimate_variance(
        self,
        params: WalkParams,
        n: int,
        replicas: int,
        base_seed: int,
        parallelism: int | None = None,
        unconstrained: bool = False,
        initial: InitialShape = "default",
    ) -> VarianceEstimate:
        """
        Sample variance of Z_{n,1}/sqrt(n) over independent replicas.

        Replica r is seeded from (base_seed, r) alone and results are
        gathered in replica order, so the estimate does not depend on the
        worker count.

        Raises:
            ValidationError: if n < 1 or replicas < 2
            SimulationError: if the worker pool breaks
        """
        if n < 1:
            raise ValidationError(f"Step count must be positive, got {n}")
        if replicas < 2:
            raise ValidationError(f"At least two replicas are needed, got {replicas}")

        workers = max(1, parallelism or settings.parallelism)
        batch = max(1, -(-replicas // (workers * 4)))
        jobs = [
            _BatchJob(params.K, params.h, n, base_seed, start, min(start + batch, replicas),
                      initial, unconstrained)
            for start in range(0, replicas, batch)
        ]

        log_with_context(
            logger, logging.INFO, "Running replicas",
            params=params.label(), n=n, replicas=replicas, workers=workers,
            unconstrained=unconstrained,
        )
        if workers == 1:
            batches = [_run_batch(job) for job in jobs]
        else:
            try:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    batches = list(pool.map(_run_batch, jobs))
            except BrokenProcessPool as e:
                logger.error(f"Worker pool failed: {e}")
                raise SimulationError("Worker pool failed", {"workers": workers}) from e

        endpoints = [pair for chunk in batches for pair in chunk]
        halves = [half for half, _ in endpoints]
        finals = [final for _, final in endpoints]

        estimate = float(_sample_moments(finals, finals) / n)
        covariance = float(_sample_moments(halves, finals) / n)
        std_error = estimate * math.sqrt(2 / (replicas - 1))

        log_with_context(
            logger, logging.INFO, "Variance estimated",
            params=params.label(), estimate=f"{estimate:.6g}", std_error=f"{std_error:.3g}",
        )
        return VarianceEstimate(
            params=params,
            n=n,
            replicas=replicas,
            base_seed=base_seed,
            estimate=estimate,
            std_error=std_error,
            half_time_covariance=covariance,
            finals=tuple(finals),
            unconstrained=unconstrained,
        )

    def area_martingale_mc_check(
        self, params: WalkParams, n: int, replicas: int, seed: int
    ) -> MartingaleCheckReport:
        """Coupling bound between K Z_{n,1} and the area, and the area's empirical drift."""
        K = params.K
        bound = 4 * K * K
        violations = 0
        drift = 0
        for r in range(replicas):
            walker = start_walker(params, derive_seed(seed, r))
            z0, ta0 = walker.z1, walker.twice_area
            for _ in range(n):
                walker.step()
                if abs(2 * K * (walker.z1 - z0) - (walker.twice_area - ta0)) > bound:
                    violations += 1
            drift += walker.twice_area - ta0

        report = MartingaleCheckReport(
            K=K,
            h=params.h,
            n=n,
            replicas=replicas,
            coupling_violations=violations,
            coupling_bound=bound // 2,
            mean_area_drift=drift / (2 * replicas),
            drift_tolerance=4 * math.sqrt(n * K * K / replicas),
        )
        log_with_context(
            logger, logging.INFO, "Area martingale check",
            params=params.label(), violations=violations,
            drift=f"{report.mean_area_drift:.4g}", passed=report.passed,
        )
        return report

    def transition_frequency_check(
        self, params: WalkParams, n: int, seed: int, threshold: float = 1e-6
    ) -> FrequencyCheckReport:
        """Chi-square test of simulated anchored-shape transitions against p(F, G)."""
        model = self.chain.build_shape_chain(params)
        walker = start_walker(params, seed)
        counts: Counter[tuple[int, int]] = Counter()
        visits: Counter[int] = Counter()
        state = model.state_of(walker.steps)
        for _ in range(n):
            walker.step()
            nxt = model.state_of(walker.steps)
            counts[state, nxt] += 1
            visits[state] += 1
            state = nxt

        statistic = 0.0
        dof = 0
        for i, v in visits.items():
            row = model.transition[i]
            for j, p in row.items():
                expected = v * float(p)
                statistic += (counts[i, j] - expected) ** 2 / expected
            dof += len(row) - 1
        p_value = float(chi2.sf(statistic, dof)) if dof else 1.0

        log_with_context(
            logger, logging.INFO, "Transition frequency check",
            params=params.label(), n=n, statistic=f"{statistic:.4g}", dof=dof,
            p_value=f"{p_value:.3g}",
        )
        return FrequencyCheckReport(
            K=params.K,
            h=params.h,
            n=n,
            statistic=statistic,
            dof=dof,
            p_value=p_value,
            threshold=threshold,
        )


# Singleton instance
simulation_service = SimulationService()
