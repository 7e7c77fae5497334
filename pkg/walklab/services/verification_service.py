"""Verification service: exhaustive checks of every identity behind the variance."""

import logging
from collections.abc import Callable
from fractions import Fraction
from typing import Any

from walklab.core.exceptions import CapacityError, IdentityViolation, ValidationError
from walklab.core.logging import log_with_context, logger
from walklab.models.params import WalkParams, admissible_gaps, make_params
from walklab.models.paths import MarkedPath, PathZ
from walklab.models.reports import CheckResult, VerificationReport
from walklab.services.chain_service import ChainService, chain_service
from walklab.services.enumeration_service import EnumerationService, enumeration_service
from walklab.services.limit_service import LimitService, limit_service
from walklab.services.path_service import PathService, path_service

# Largest K at which each exhaustive check still runs in seconds
BIJECTION_K_MAX = 10
INVOLUTION_K_MAX = 8
INVOLUTION_STAR_K_MAX = 6
STAR_K_MAX = 10

Counterexample = dict[str, Any] | None

CHECK_NAMES = (
    "neighbourhood",
    "bijection",
    "involution",
    "involution_star",
    "zero_sum",
    "total_area",
    "star_sums",
    "coupling",
    "shape_chain",
    "cross_term",
    "step_variance",
    "triple_agreement",
    "combinatorics",
)


def _path_pair(z: PathZ, zp: PathZ) -> dict[str, Any]:
    return {"z": list(z.heights), "zp": list(zp.heights)}


def _marked(m: MarkedPath) -> dict[str, Any]:
    mark = m.mark if isinstance(m.mark, int) else m.mark.value
    return {**_path_pair(m.base, m.neighbor), "mark": mark}


class VerificationService:
    """Runs the exhaustive identity suite over all small (K, h)."""

    def __init__(
        self,
        paths: PathService = path_service,
        enumeration: EnumerationService = enumeration_service,
        chain: ChainService = chain_service,
        limits: LimitService = limit_service,
    ) -> None:
        self.paths = paths
        self.enumeration = enumeration
        self.chain = chain
        self.limits = limits

    def run_suite(self, K_max: int = 8, inject_fault: bool = False) -> VerificationReport:
        """
        Check every identity for all 1 <= K <= K_max and every admissible h.

        Args:
            K_max: Largest step count enumerated
            inject_fault: Flip the sign of one area difference in the zero-sum
                check, to exercise the failure path

        Returns:
            One CheckResult per identity; a failing result carries the first
            counterexample met in order of increasing (K, h)
        """
        if K_max < 1:
            raise ValidationError(f"K_max must be positive, got {K_max}")

        results = {name: CheckResult(name=name) for name in CHECK_NAMES}
        fault_pending = inject_fault
        for K in range(1, K_max + 1):
            if K <= INVOLUTION_STAR_K_MAX:
                self._run(results["involution_star"], self._check_involution_star, K)
            if K <= STAR_K_MAX:
                self._run(results["star_sums"], self._check_star_sums, K)

            for h in admissible_gaps(K):
                params = make_params(K, h)
                self._run(results["neighbourhood"], self._check_neighbourhood, params)
                if K <= BIJECTION_K_MAX:
                    self._run(results["bijection"], self._check_bijection, params)
                if K <= INVOLUTION_K_MAX:
                    self._run(results["involution"], self._check_involution, params)
                self._run(results["zero_sum"], self._check_zero_sum, params, fault_pending)
                fault_pending = False
                self._run(results["total_area"], self._check_total_area, params)
                self._run(results["coupling"], self._check_coupling, params)
                self._run(results["shape_chain"], self._check_shape_chain, params)
                self._run(results["cross_term"], self._check_cross_term, params)
                self._run(results["step_variance"], self._check_step_variance, params)
                self._run(results["triple_agreement"], self._check_triple_agreement, params)
                self._run(results["combinatorics"], self._check_combinatorics, params)

        report = VerificationReport(K_max=K_max, results=list(results.values()))
        log_with_context(
            logger, logging.INFO, "Verification finished",
            K_max=K_max, passed=report.passed,
            failed=[r.name for r in report.results if not r.passed],
        )
        return report

    def _run(
        self,
        result: CheckResult,
        check: Callable[..., Counterexample],
        *args: Any,
    ) -> None:
        if not result.passed:
            return
        try:
            counterexample = check(*args)
        except CapacityError as e:
            result.passed = False
            result.error = "capacity"
            result.counterexample = e.details
            return
        except IdentityViolation as e:
            counterexample = {"identity": e.identity, **e.counterexample}
        except ValidationError as e:
            counterexample = {"error": e.message, **e.details}
        result.checked += 1
        if counterexample is not None:
            result.passed = False
            result.counterexample = counterexample
            log_with_context(
                logger, logging.ERROR, "Identity violated",
                check=result.name, counterexample=counterexample,
            )

    def _check_neighbourhood(self, params: WalkParams) -> Counterexample:
        """Symmetric relation, Gamma+ and Gamma- partition Gamma, even crossing counts."""
        for z in self.paths.enumerate_anchored(params):
            neighbours = self.paths.neighbors(z)
            plus = self.paths.gamma_plus(z)
            minus = self.paths.gamma_minus(z)
            if (
                len(plus) + len(minus) != len(neighbours)
                or any(zp.z1 != z.z1 + 1 for zp in plus)
                or any(zp.z1 != z.z1 - 1 for zp in minus)
            ):
                return {"K": params.K, "h": params.h, "z": list(z.heights), "reason": "partition"}
            for zp in neighbours:
                if z not in self.paths.neighbors(zp):
                    return {**_path_pair(z, zp), "reason": "asymmetric"}
                if len(self.paths.crossings(z, zp).crossing_steps) % 2:
                    return {**_path_pair(z, zp), "reason": "odd crossings"}
        return None

    def _check_bijection(self, params: WalkParams) -> Counterexample:
        pairs = 0
        for z in self.paths.enumerate_anchored(params):
            for zp in self.paths.gamma_plus(z):
                pairs += 1
                word = self.enumeration.phi_plus(z, zp)
                if self.enumeration.phi_plus_inverse(z.z1, word) != (z, zp):
                    return {**_path_pair(z, zp), "word": list(word.steps)}
        expected = self.enumeration.motzkin_count(params)
        if pairs != expected:
            return {"K": params.K, "h": params.h, "pairs": pairs, "motzkin": expected}
        for word in self.enumeration.motzkin_enumerate(params):
            z, zp = self.enumeration.phi_plus_inverse(0, word)
            if self.enumeration.phi_plus(z, zp) != word:
                return {"K": params.K, "h": params.h, "word": list(word.steps)}
        return None

    def _involution_counterexample(
        self, m: MarkedPath, image: MarkedPath, back: MarkedPath
    ) -> Counterexample:
        if image.base != m.base or back != m or image.sign != -m.sign:
            return {**_marked(m), "image": _marked(image)}
        return None

    def _check_involution(self, params: WalkParams) -> Counterexample:
        for z in self.paths.enumerate_anchored(params):
            for m in self.enumeration.marked_paths(z):
                image = self.enumeration.involution(m)
                self.paths.crossings(z, image.neighbor)
                found = self._involution_counterexample(m, image, self.enumeration.involution(image))
                if found:
                    return found
            if self.enumeration.signed_mark_total(z):
                return {"K": params.K, "h": params.h, "z": list(z.heights), "reason": "sign sum"}
        return None

    def _check_involution_star(self, K: int) -> Counterexample:
        for z in self.paths.enumerate_anchored_free(K):
            for m in self.enumeration.marked_paths(z, unconstrained=True):
                image = self.enumeration.involution_star(m)
                self.paths.crossings(z, image.neighbor, pinned=False)
                back = self.enumeration.involution_star(image)
                found = self._involution_counterexample(m, image, back)
                if found:
                    return found
        return None

    def _check_zero_sum(self, params: WalkParams, fault: bool) -> Counterexample:
        report = self.chain.martingale_generator_check(params, fault=fault)
        if not report.passed:
            return {"K": params.K, "h": params.h, "z": report.violations[0]}
        return None

    def _check_total_area(self, params: WalkParams) -> Counterexample:
        total = self.enumeration.total_area_sum_bruteforce(params)
        expected = self.enumeration.A_Kh(params)
        if total != expected:
            return {"K": params.K, "h": params.h, "bruteforce": total, "closed_form": expected}
        return None

    def _check_star_sums(self, K: int) -> Counterexample:
        total = self.enumeration.total_area_sum_star_bruteforce(K)
        pairs = self.enumeration.unconstrained_pair_count(K)
        if total != 2 * 3**K or pairs != 3**K:
            return {"K": K, "area_sum": total, "pairs": pairs, "expected_pairs": 3**K}
        if self.limits.sigma2_star_bruteforce(K) != self.limits.sigma2_star(K):
            return {"K": K, "sigma2_star": str(self.limits.sigma2_star_bruteforce(K))}
        return None

    def _check_coupling(self, params: WalkParams) -> Counterexample:
        """0 <= f_K <= K^2 on C_{K,h}; 0 <= f*_K <= (K+2)^2 on the extended paths."""
        K = params.K
        for z in self.paths.enumerate_anchored(params):
            for shift in (0, 3):
                w = z.shifted(shift)
                f = self.paths.coupling_defect(w)
                f_star = self.paths.coupling_defect_star(w)
                if not (0 <= f <= K * K and 0 <= f_star <= (K + 2) ** 2):
                    return {"z": list(w.heights), "f": str(f), "f_star": str(f_star)}
        return None

    def _check_shape_chain(self, params: WalkParams) -> Counterexample:
        model = self.chain.build_shape_chain(params)
        measure = self.chain.stationary(model)
        for i, row in enumerate(model.transition):
            degree = model.degree(i)
            off_diagonal = all(p == Fraction(1, degree) for j, p in row.items() if j != i)
            if sum(row.values()) != 1 or row.get(i) != Fraction(2, degree) or not off_diagonal:
                return {"K": params.K, "h": params.h, "shape": list(model.states[i].steps)}
        if measure.total != 1 or not self.chain.stationarity_holds(model, measure):
            return {"K": params.K, "h": params.h, "reason": "not stationary"}
        ergodicity = self.chain.ergodicity_check(model)
        if not (ergodicity.irreducible and ergodicity.aperiodic):
            return {"K": params.K, "h": params.h, **ergodicity.model_dump()}
        return None

    def _check_cross_term(self, params: WalkParams) -> Counterexample:
        value = self.chain.cross_term(params)
        if value != 0:
            return {"K": params.K, "h": params.h, "cross_term": str(value)}
        return None

    def _check_step_variance(self, params: WalkParams) -> Counterexample:
        report = self.chain.step_variance_by_shape(params)
        if not report.depends_on_shape_only:
            return {"K": params.K, "h": params.h, "offsets": report.offsets}
        return None

    def _check_triple_agreement(self, params: WalkParams) -> Counterexample:
        exact = self.chain.exact_sigma2(params)
        llt = self.limits.sigma2_via_llt(params)
        if llt != exact.closed_form:
            return {
                "K": params.K,
                "h": params.h,
                "llt": str(llt),
                "closed_form": str(exact.closed_form),
            }
        return None

    def _check_combinatorics(self, params: WalkParams) -> Counterexample:
        if not self.enumeration.pascal_identity_holds(params):
            return {"K": params.K, "h": params.h, "reason": "pascal"}
        total = self.enumeration.shape_degree_total(params)
        if total != 2 * self.enumeration.B_Kh(params):
            return {"K": params.K, "h": params.h, "degree_total": total}
        return None


# Singleton instance
verification_service = VerificationService()
