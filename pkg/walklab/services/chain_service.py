"""Chain service: the exact shape chain, its stationary measure and the variance."""

import logging
from collections import Counter, deque
from fractions import Fraction
from functools import lru_cache

from walklab.config import settings
from walklab.core.exceptions import CapacityError, IdentityViolation
from walklab.core.logging import log_with_context, logger
from walklab.models.chain import ExactVariance, Move, ShapeChainModel, StationaryMeasure
from walklab.models.params import WalkParams
from walklab.models.reports import ErgodicityReport, GeneratorCheckReport, StepVarianceReport
from walklab.services.enumeration_service import (
    EnumerationService,
    binomial,
    enumeration_service,
)
from walklab.services.path_service import (
    DisplacementTable,
    PathService,
    moved_steps,
    path_service,
    twice_area_change,
)


class ChainService:
    """Service for exact computations on the quotient chain of anchored shapes."""

    def __init__(
        self,
        paths: PathService = path_service,
        enumeration: EnumerationService = enumeration_service,
    ) -> None:
        self.paths = paths
        self.enumeration = enumeration
        self._cached_chain = lru_cache(maxsize=settings.chain_cache_size)(self._enumerate_chain)

    def build_shape_chain(self, params: WalkParams) -> ShapeChainModel:
        """
        Enumerate the shape chain of C_{K,h}.

        Args:
            params: Walk parameters

        Returns:
            Model with per-state moves and exact transition rows

        Raises:
            CapacityError: if C(K, g) exceeds the state cap
        """
        size = binomial(params.K, params.g)
        if size > settings.state_cap:
            log_with_context(
                logger, logging.WARNING, "State cap exceeded",
                params=params.label(), states=size, cap=settings.state_cap,
            )
            raise CapacityError(
                f"Shape chain for {params.label()} has {size} states",
                cap=settings.state_cap,
                requested=size,
            )

        return self._cached_chain(params)

    def _enumerate_chain(self, params: WalkParams) -> ShapeChainModel:
        states = tuple(self.paths.iter_shapes(params))
        index = {shape.steps: i for i, shape in enumerate(states)}
        all_moves: list[tuple[Move, ...]] = []
        rows: list[dict[int, Fraction]] = []
        for shape in states:
            table = DisplacementTable.build(shape.steps)
            moves = []
            for u in range(table.degree):
                d = table.decode(u)
                target = index[moved_steps(shape.steps, d)]
                moves.append(Move(target, d[0], twice_area_change(d)))
            counts = Counter(move.target for move in moves)
            rows.append({j: Fraction(c, len(moves)) for j, c in sorted(counts.items())})
            all_moves.append(tuple(moves))

        model = ShapeChainModel(
            params=params,
            states=states,
            deg_s=tuple(len(moves) - 1 for moves in all_moves),
            moves=tuple(all_moves),
            transition=tuple(rows),
            index=index,
        )
        log_with_context(
            logger, logging.INFO, "Built shape chain", params=params.label(), states=model.size
        )
        return model

    def stationary(self, model: ShapeChainModel) -> StationaryMeasure:
        """pi_S(F) proportional to deg_S(F) + 1, checked for detailed balance."""
        total = sum(model.degree(i) for i in range(model.size))
        measure = StationaryMeasure(
            tuple(Fraction(model.degree(i), total) for i in range(model.size))
        )
        for i, row in enumerate(model.transition):
            for j, p in row.items():
                if measure[i] * p != measure[j] * model.transition[j].get(i, 0):
                    raise IdentityViolation(
                        "Detailed balance fails",
                        identity="detailed_balance",
                        counterexample={
                            "K": model.params.K,
                            "h": model.params.h,
                            "from": list(model.states[i].steps),
                            "to": list(model.states[j].steps),
                        },
                    )
        return measure

    def stationarity_holds(self, model: ShapeChainModel, measure: StationaryMeasure) -> bool:
        """pi P = pi, exactly."""
        flow = [Fraction(0)] * model.size
        for i, row in enumerate(model.transition):
            for j, p in row.items():
                flow[j] += measure[i] * p
        return tuple(flow) == measure.weights

    def closed_form_sigma2(self, params: WalkParams) -> Fraction:
        """(1/K) A_{K,h} / B_{K,h}."""
        return Fraction(
            self.enumeration.A_Kh(params), params.K * self.enumeration.B_Kh(params)
        )

    def stationary_sigma2(self, params: WalkParams) -> Fraction:
        """(1/K) E_pi[(A(Z_1) - A(Z_0)) (Z_{1,1} - Z_{0,1})] by exact summation."""
        model = self.build_shape_chain(params)
        measure = self.stationary(model)
        expectation = Fraction(0)
        for i, moves in enumerate(model.moves):
            weight = measure[i] / model.degree(i)
            expectation += weight * Fraction(
                sum(move.twice_area_change * move.dz1 for move in moves), 2
            )
        return expectation / params.K

    def exact_sigma2(self, params: WalkParams) -> ExactVariance:
        """Both exact evaluations of sigma^2_{K,h}; raises IdentityViolation if they differ."""
        result = ExactVariance(
            params=params,
            stationary=self.stationary_sigma2(params),
            closed_form=self.closed_form_sigma2(params),
        )
        if result.stationary != result.closed_form:
            log_with_context(
                logger, logging.ERROR, "Variance evaluations disagree",
                params=params.label(), stationary=result.stationary,
                closed_form=result.closed_form,
            )
            raise IdentityViolation(
                f"Stationary and closed-form variances differ for {params.label()}",
                identity="variance_formula",
                counterexample={
                    "K": params.K,
                    "h": params.h,
                    "stationary": str(result.stationary),
                    "closed_form": str(result.closed_form),
                },
            )
        return result

    def cross_term(self, params: WalkParams) -> Fraction:
        """E_pi[(A(Z_1) - A(Z_0)) (f_K(Z_1) - f_K(Z_0))], which reversibility makes 0."""
        model = self.build_shape_chain(params)
        measure = self.stationary(model)
        K = params.K
        total = Fraction(0)
        for i, moves in enumerate(model.moves):
            weight = measure[i] / model.degree(i)
            for move in moves:
                area = Fraction(move.twice_area_change, 2)
                total += weight * area * (K * move.dz1 - area)
        return total

    def martingale_generator_check(
        self, params: WalkParams, fault: bool = False
    ) -> GeneratorCheckReport:
        """
        Check that the area has zero drift from every anchored path.

        Args:
            params: Walk parameters
            fault: Negate one area difference (self-test of the failure path)

        Returns:
            Report listing every path whose neighbour area changes do not sum to 0
        """
        violations: list[list[int]] = []
        checked = 0
        for z in self.paths.enumerate_anchored(params):
            base = self.paths.twice_area(z)
            changes = [self.paths.twice_area(zp) - base for zp in self.paths.neighbors(z)]
            if fault and checked == 0:
                changes[0] = -changes[0]
            if sum(changes):
                violations.append(list(z.heights))
            checked += 1
        if violations:
            log_with_context(
                logger, logging.ERROR, "Area drift is not zero",
                params=params.label(), first=violations[0],
            )
        return GeneratorCheckReport(
            K=params.K, h=params.h, paths_checked=checked, violations=violations
        )

    def step_variance_by_shape(
        self, params: WalkParams, offsets: tuple[int, ...] = (-3, 0, 2, 7)
    ) -> StepVarianceReport:
        """E[(2 dA)^2 | z] at several starting heights of every shape."""
        shape_only = True
        shapes = 0
        for shape in self.paths.iter_shapes(params):
            seconds = set()
            for z1 in offsets:
                z = shape.at(z1)
                base = self.paths.twice_area(z)
                neighbours = self.paths.neighbors(z)
                seconds.add(Fraction(
                    sum((self.paths.twice_area(zp) - base) ** 2 for zp in neighbours),
                    len(neighbours),
                ))
            shape_only = shape_only and len(seconds) == 1
            shapes += 1
        return StepVarianceReport(
            K=params.K,
            h=params.h,
            shapes_checked=shapes,
            offsets=list(offsets),
            depends_on_shape_only=shape_only,
        )

    def ergodicity_check(self, model: ShapeChainModel) -> ErgodicityReport:
        """Irreducibility by breadth-first search; aperiodicity from self-loops."""
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in model.transition[i]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return ErgodicityReport(
            states=model.size,
            reachable=len(seen),
            has_self_loops=all(i in row for i, row in enumerate(model.transition)),
        )


# Singleton instance
chain_service = ChainService()
