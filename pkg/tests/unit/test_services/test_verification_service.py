"""Unit tests for verification service."""

from unittest.mock import patch

import pytest

from walklab.core.exceptions import ValidationError
from walklab.models.params import admissible_gaps, make_params
from walklab.services.chain_service import ChainService
from walklab.services.enumeration_service import EnumerationService
from walklab.services.limit_service import LimitService
from walklab.services.path_service import PathService
from walklab.services.verification_service import CHECK_NAMES, VerificationService


def _fresh_service() -> VerificationService:
    paths = PathService()
    enumeration = EnumerationService(paths)
    return VerificationService(
        paths=paths,
        enumeration=enumeration,
        chain=ChainService(paths, enumeration),
        limits=LimitService(enumeration),
    )


class TestVerificationSuite:
    """Tests for the exhaustive identity suite."""

    @pytest.fixture
    def verification_service(self) -> VerificationService:
        """Create verification service instance."""
        return _fresh_service()

    def test_small_suite_passes(self, verification_service: VerificationService):
        report = verification_service.run_suite(K_max=5)

        assert report.passed
        assert [r.name for r in report.results] == list(CHECK_NAMES)
        assert all(r.checked > 0 for r in report.results)
        assert not report.capacity_failure

    def test_injected_fault(self, verification_service: VerificationService):
        """Test a flipped sign fails only the zero-sum check, at the smallest case."""
        report = verification_service.run_suite(K_max=3, inject_fault=True)
        failed = [r for r in report.results if not r.passed]

        assert not report.passed
        assert [r.name for r in failed] == ["zero_sum"]
        assert failed[0].counterexample == {"K": 1, "h": 1, "z": [0, 1]}
        assert failed[0].error is None

    def test_capacity_failure(self, verification_service: VerificationService):
        with patch("walklab.services.path_service.settings") as mock_settings:
            mock_settings.enumeration_cap = 2
            report = verification_service.run_suite(K_max=3)

        assert not report.passed
        assert report.capacity_failure
        neighbourhood = next(r for r in report.results if r.name == "neighbourhood")
        assert neighbourhood.error == "capacity"
        assert neighbourhood.counterexample == {"cap": 2, "requested": 3}

    def test_rejects_empty_range(self, verification_service: VerificationService):
        with pytest.raises(ValidationError):
            verification_service.run_suite(K_max=0)

    def test_default_range(self, verification_service: VerificationService):
        """Test the full suite through K = 8."""
        assert verification_service.run_suite().passed

    @pytest.mark.slow
    def test_extended_range(self, verification_service: VerificationService):
        """Test every check through K = 12, area identities exhaustively."""
        report = verification_service.run_suite(K_max=12)

        assert report.passed
        assert not report.capacity_failure


class TestTripleAgreement:
    """Tests for the three exact variance evaluations."""

    @pytest.mark.parametrize("K", range(1, 13))
    def test_all_gaps(self, K: int):
        chain = ChainService()
        limits = LimitService()
        for h in admissible_gaps(K):
            params = make_params(K, h)
            exact = chain.exact_sigma2(params)
            assert exact.stationary == exact.closed_form == limits.sigma2_via_llt(params)
