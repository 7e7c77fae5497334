"""Enumeration service: Grand Motzkin paths, marked paths and signed area sums."""

import logging
import math
from collections.abc import Iterator

from walklab.core.exceptions import IdentityViolation, ValidationError
from walklab.core.logging import log_with_context, logger
from walklab.models.params import WalkParams
from walklab.models.paths import EndMark, MarkedPath, MotzkinPath, PathZ
from walklab.services.path_service import PathService, path_service


def binomial(n: int, k: int) -> int:
    """C(n, k), taken as 0 outside 0 <= k <= n."""
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _motzkin_words(length: int, total: int) -> Iterator[tuple[int, ...]]:
    if length == 0:
        if total == 0:
            yield ()
        return
    for step in (-1, 0, 1):
        rest = total - step
        if abs(rest) <= length - 1:
            for tail in _motzkin_words(length - 1, rest):
                yield (step, *tail)


class EnumerationService:
    """Service for the combinatorics behind the variance formula."""

    def __init__(self, paths: PathService = path_service) -> None:
        self.paths = paths

    def motzkin_count(self, params: WalkParams) -> int:
        """|M_{K,h}| = sum_k C(K, 2k) C(K - 2k, g - k)."""
        K, g = params.K, params.g
        return sum(binomial(K, 2 * k) * binomial(K - 2 * k, g - k) for k in range(K // 2 + 1))

    def grand_motzkin_count(self, n: int, x: int) -> int:
        """Number of {-1, 0, +1} sequences of length n summing to x, for any integer x."""
        x = abs(x)
        if n < 0 or x > n:
            return 0
        return sum(
            binomial(n, zeros) * binomial(n - zeros, (n - zeros - x) // 2)
            for zeros in range((n - x) % 2, n - x + 1, 2)
        )

    def motzkin_enumerate(self, params: WalkParams) -> Iterator[MotzkinPath]:
        """Each element of M_{K,h} once, in lexicographic order (-1 < 0 < +1)."""
        self.paths.check_enumeration_cap(params.K)
        for word in _motzkin_words(params.K, params.h):
            yield MotzkinPath(word)

    def A_Kh(self, params: WalkParams) -> int:
        """sum_k C(K, 2k + 1) C(K - 2k, g - k)."""
        K, g = params.K, params.g
        return sum(
            binomial(K, 2 * k + 1) * binomial(K - 2 * k, g - k) for k in range(K // 2 + 1)
        )

    def B_Kh(self, params: WalkParams) -> int:
        return self.motzkin_count(params)

    def pascal_identity_holds(self, params: WalkParams) -> bool:
        """C(K-2k-1, g-k-1) + C(K-2k-1, g-k) = C(K-2k, g-k) for every k with K-2k-1 >= 0."""
        K, g = params.K, params.g
        return all(
            binomial(K - 2 * k - 1, g - k - 1) + binomial(K - 2 * k - 1, g - k)
            == binomial(K - 2 * k, g - k)
            for k in range((K - 1) // 2 + 1)
        )

    def phi_plus(self, z: PathZ, zp: PathZ) -> MotzkinPath:
        """
        Motzkin word of an up-moving neighbour pair.

        Args:
            z: Base path
            zp: A neighbour in Gamma+(z)

        Returns:
            M with M_i = F_i where both shapes agree and 0 where zp crosses z
        """
        d = self.paths.displacement(z, zp)
        if d[0] != 1:
            raise ValidationError(
                "Neighbour is not in Gamma+", {"z": list(z.heights), "zp": list(zp.heights)}
            )
        return MotzkinPath(tuple(
            f if f == fp else 0 for f, fp in zip(z.steps, zp.steps, strict=True)
        ))

    def phi_plus_inverse(self, z1: int, word: MotzkinPath) -> tuple[PathZ, PathZ]:
        """The unique (z, zp) with z starting at z1, zp in Gamma+(z) and phi_plus(z, zp) = word."""
        sign = 1
        displacement = [sign]
        steps: list[int] = []
        for m in word.steps:
            if m:
                steps.append(m)
            else:
                # a crossing needs the base step to point the way the displacement does
                steps.append(sign)
                sign = -sign
            displacement.append(sign)
        z = PathZ.from_steps(z1, steps)
        zp = PathZ(tuple(a + b for a, b in zip(z.heights, displacement, strict=True)))
        return z, zp

    def marked_paths(self, z: PathZ, unconstrained: bool = False) -> list[MarkedPath]:
        """Every marked path of base z (the domain of the involution)."""
        marked: list[MarkedPath] = []
        for zp in self.paths.neighbors(z, pinned=not unconstrained):
            profile = self.paths.crossings(z, zp, pinned=not unconstrained)
            if unconstrained:
                marked.append(MarkedPath(z, zp, EndMark.INITIAL))
            marked.extend(MarkedPath(z, zp, p) for p, _ in profile.noncrossing_steps)
            if unconstrained:
                marked.append(MarkedPath(z, zp, EndMark.FINAL))
        return marked

    def involution(self, m: MarkedPath) -> MarkedPath:
        """Sign-reversing involution on marked paths of the constrained model."""
        return self._exchange(m, pinned=True)

    def involution_star(self, m: MarkedPath) -> MarkedPath:
        """Sign-reversing involution on marked paths of the unconstrained model."""
        return self._exchange(m, pinned=False)

    def signed_mark_total(self, z: PathZ, unconstrained: bool = False) -> int:
        """Sum of signs over all marked paths of z; the involution forces zero."""
        return sum(m.sign for m in self.marked_paths(z, unconstrained))

    def total_area_sum_bruteforce(self, params: WalkParams) -> int:
        """Sum over anchored z and zp in Gamma+(z) of A(zp) - A(z)."""
        total = 0
        for z in self.paths.enumerate_anchored(params):
            base = self.paths.twice_area(z)
            total += sum(self.paths.twice_area(zp) - base for zp in self.paths.gamma_plus(z))
        if total % 2:
            raise IdentityViolation(
                "Total area over Gamma+ is not an integer",
                identity="total_area",
                counterexample={"K": params.K, "h": params.h, "twice_total": total},
            )
        log_with_context(
            logger, logging.INFO, "Summed area over Gamma+", params=params.label(), total=total // 2
        )
        return total // 2

    def total_area_sum_star_bruteforce(self, K: int) -> int:
        """Sum over anchored z in C_K and zp in Gamma+(z) of A*(zp) - A*(z)."""
        total = 0
        for z in self.paths.enumerate_anchored_free(K):
            base = self.paths.twice_area_star(z)
            total += sum(
                self.paths.twice_area_star(zp) - base
                for zp in self.paths.gamma_plus(z, pinned=False)
            )
        if total % 2:
            raise IdentityViolation(
                "Extended total area over Gamma+ is not an integer",
                identity="total_area_star",
                counterexample={"K": K, "twice_total": total},
            )
        return total // 2

    def shape_degree_total(self, params: WalkParams) -> int:
        """sum over anchored shapes of deg_S(F) + 1."""
        return sum(self.paths.degree(z) for z in self.paths.enumerate_anchored(params))

    def unconstrained_pair_count(self, K: int) -> int:
        return sum(
            len(self.paths.gamma_plus(z, pinned=False))
            for z in self.paths.enumerate_anchored_free(K)
        )

    def _exchange(self, m: MarkedPath, pinned: bool) -> MarkedPath:
        base = m.base
        K = base.K
        d = list(self.paths.displacement(base, m.neighbor, pinned))
        crossings = [p for p in range(1, K + 1) if d[p - 1] != d[p]]
        mark = m.mark

        if isinstance(mark, EndMark):
            if pinned:
                raise ValidationError("End marks only exist in the unconstrained model")
            if not crossings:
                other = EndMark.FINAL if mark is EndMark.INITIAL else EndMark.INITIAL
                return MarkedPath(base, self._translate(base, -d[0]), other)
            if mark is EndMark.INITIAL:
                q = crossings[0]
                self._flip(d, 1, q)
            else:
                q = crossings[-1]
                self._flip(d, q + 1, K + 1)
            return self._rebuilt(base, d, q)

        p = self._checked_step_mark(mark, K, crossings, m)
        sign = d[p - 1]
        step = base.steps[p - 1]

        if not crossings and pinned:
            return MarkedPath(base, self._translate(base, -sign), p)

        left = [c for c in crossings if c < p]
        right = [c for c in crossings if c > p]
        if step == sign:
            # the partner lies to the right of the mark (wrapping, or the final end)
            if right:
                q: int | EndMark = right[0]
            elif pinned:
                q = crossings[0]
            else:
                q = EndMark.FINAL
            last = q if isinstance(q, int) else K + 1
            self._flip_cyclic(d, p + 1, last)
        else:
            if left:
                q = left[-1]
            elif pinned:
                q = crossings[-1]
            else:
                q = EndMark.INITIAL
            first = q + 1 if isinstance(q, int) else 1
            self._flip_cyclic(d, first, p)
        return self._rebuilt(base, d, q)

    def _checked_step_mark(
        self, mark: int, K: int, crossings: list[int], m: MarkedPath
    ) -> int:
        if not 1 <= mark <= K or mark in crossings:
            raise ValidationError(
                f"Mark {mark} is not a non-crossing step",
                {
                    "base": list(m.base.heights),
                    "neighbor": list(m.neighbor.heights),
                    "crossings": crossings,
                },
            )
        return mark

    @staticmethod
    def _flip(d: list[int], first: int, last: int) -> None:
        """Negate d_first..d_last (1-based, inclusive)."""
        for i in range(first - 1, last):
            d[i] = -d[i]

    def _flip_cyclic(self, d: list[int], first: int, last: int) -> None:
        if first <= last:
            self._flip(d, first, last)
        else:
            self._flip(d, first, len(d))
            self._flip(d, 1, last)

    def _translate(self, z: PathZ, offset: int) -> PathZ:
        return z.shifted(offset)

    def _rebuilt(self, base: PathZ, d: list[int], mark: int | EndMark) -> MarkedPath:
        neighbor = PathZ(tuple(a + b for a, b in zip(base.heights, d, strict=True)))
        return MarkedPath(base, neighbor, mark)


# Singleton instance
enumeration_service = EnumerationService()
