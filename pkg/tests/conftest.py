"""Pytest configuration and fixtures."""

import os

import pytest

# Set test environment before importing walklab
os.environ["APP_ENV"] = "development"
os.environ["DEBUG"] = "false"
os.environ["SENTRY_DSN"] = ""
os.environ["ENUMERATION_CAP"] = "24"
os.environ["STATE_CAP"] = "3000000"
os.environ["DEFAULT_PARALLELISM"] = "1"

from walklab.models.params import WalkParams, make_params  # noqa: E402
from walklab.models.paths import PathZ  # noqa: E402


@pytest.fixture
def params_2_0() -> WalkParams:
    """Two steps, endpoints level."""
    return make_params(2, 0)


@pytest.fixture
def params_4_0() -> WalkParams:
    return make_params(4, 0)


@pytest.fixture
def rigid_rod() -> WalkParams:
    """K=2, h=2: every walker moves together."""
    return make_params(2, 2)


@pytest.fixture
def small_pair() -> tuple[PathZ, PathZ]:
    """A K=6, h=2 path and an up-moving neighbour with two crossings."""
    z = PathZ((0, 1, 0, 1, 2, 1, 2))
    zp = PathZ((1, 0, 1, 2, 3, 2, 3))
    return z, zp


@pytest.fixture
def long_pair() -> tuple[PathZ, PathZ]:
    """A K=15, h=3 path and a neighbour crossing it at steps 1, 3, 8 and 12."""
    z = PathZ((0, 1, 2, 1, 2, 3, 2, 3, 4, 3, 2, 3, 2, 3, 4, 3))
    zp = PathZ((1, 0, 1, 2, 3, 4, 3, 4, 3, 2, 1, 2, 3, 4, 5, 4))
    return z, zp
