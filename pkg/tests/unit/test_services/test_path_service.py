"""Unit tests for path service."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklab.core.exceptions import CapacityError, ValidationError
from walklab.models.params import make_params
from walklab.models.paths import PathZ, ShapeBar, StepShape
from walklab.services.path_service import DisplacementTable, PathService

unit_steps = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=12)
start_heights = st.integers(min_value=-5, max_value=5)


class TestNeighbourhood:
    """Tests for neighbour enumeration."""

    @pytest.fixture
    def path_service(self) -> PathService:
        """Create path service instance."""
        return PathService()

    def test_neighbors_of_peak(self, path_service: PathService):
        """Test the three neighbours of (0,1,0), up-moving first."""
        z = PathZ((0, 1, 0))

        assert path_service.neighbors(z) == [
            PathZ((1, 2, 1)),
            PathZ((1, 0, 1)),
            PathZ((-1, 0, -1)),
        ]
        assert path_service.degree(z) == 3

    def test_gamma_split(self, path_service: PathService):
        """Test Gamma+ and Gamma- of (0,1,0)."""
        z = PathZ((0, 1, 0))

        assert path_service.gamma_plus(z) == [PathZ((1, 2, 1)), PathZ((1, 0, 1))]
        assert path_service.gamma_minus(z) == [PathZ((-1, 0, -1))]

    def test_rigid_dimer(self, path_service: PathService):
        """Test K=1, h=1 only translates."""
        z = PathZ((0, 1))

        assert path_service.neighbors(z) == [PathZ((1, 2)), PathZ((-1, 0))]

    def test_unpinned_neighbors(self, path_service: PathService):
        """Test free endpoints add the crossing move that changes the gap."""
        assert path_service.neighbors(PathZ((0, 1)), pinned=False) == [
            PathZ((1, 2)),
            PathZ((1, 0)),
            PathZ((-1, 0)),
        ]
        assert len(path_service.gamma_plus(PathZ((0, -1)), pinned=False)) == 1

    def test_displacement_table_decode_out_of_range(self):
        """Test decoding past the degree is rejected."""
        table = DisplacementTable.build((1, -1))

        assert table.degree == 3
        assert table.branch_size(1) == 2
        with pytest.raises(ValidationError):
            table.decode(3)

    @settings(deadline=None)
    @given(z1=start_heights, steps=unit_steps)
    def test_neighbourhood_is_symmetric(self, z1: int, steps: list[int]):
        """Test every neighbour keeps the gap and has z among its own neighbours."""
        path_service = PathService()
        z = PathZ.from_steps(z1, steps)
        neighbours = path_service.neighbors(z)

        assert len(neighbours) == path_service.degree(z)
        assert len(set(neighbours)) == len(neighbours)
        for zp in neighbours:
            assert zp.gap == z.gap
            assert z in path_service.neighbors(zp)

    @given(z1=start_heights, steps=unit_steps)
    def test_area_has_zero_drift(self, z1: int, steps: list[int]):
        """Test the area changes over all neighbours sum to zero."""
        path_service = PathService()
        z = PathZ.from_steps(z1, steps)
        base = path_service.twice_area(z)

        assert sum(path_service.twice_area(zp) - base for zp in path_service.neighbors(z)) == 0


class TestAreas:
    """Tests for area and coupling functionals."""

    @pytest.fixture
    def path_service(self) -> PathService:
        return PathService()

    def test_area_of_peak(self, path_service: PathService):
        """Test A(0,1,0) = 1."""
        z = PathZ((0, 1, 0))

        assert path_service.twice_area(z) == 2
        assert path_service.area(z) == Fraction(1)

    def test_coupling_defects(self, path_service: PathService):
        """Test f_K and its extended counterpart at (0,1,0)."""
        z = PathZ((0, 1, 0))

        assert path_service.coupling_defect(z) == Fraction(1)
        assert path_service.twice_area_star(z) == 2
        assert path_service.coupling_defect_star(z) == Fraction(7)

    def test_coupling_defect_is_shift_invariant(self, path_service: PathService):
        """Test f_K does not depend on the starting height."""
        z = PathZ((0, -1, 0, 1, 2))

        assert path_service.coupling_defect(z) == path_service.coupling_defect(z.shifted(5))


class TestCrossings:
    """Tests for crossing decomposition of neighbour pairs."""

    @pytest.fixture
    def path_service(self) -> PathService:
        return PathService()

    def test_small_pair(self, path_service: PathService, small_pair: tuple[PathZ, PathZ]):
        """Test two crossings at the first steps."""
        z, zp = small_pair
        profile = path_service.crossings(z, zp)

        assert profile.crossing_steps == (1, 2)
        assert profile.noncrossing_steps == ((3, 1), (4, 1), (5, 1), (6, 1))
        assert profile.area_change == 4
        assert path_service.twice_area(zp) - path_service.twice_area(z) == 8

    def test_long_pair(self, path_service: PathService, long_pair: tuple[PathZ, PathZ]):
        """Test four crossings and the signed area of the remaining steps."""
        z, zp = long_pair
        profile = path_service.crossings(z, zp)

        assert profile.crossing_steps == (1, 3, 8, 12)
        assert profile.area_change == 3
        assert path_service.twice_area(zp) - path_service.twice_area(z) == 6
        assert zp in path_service.gamma_plus(z)

    def test_rejects_non_neighbour(self, path_service: PathService):
        """Test a path is not its own neighbour."""
        z = PathZ((0, 1, 0))

        with pytest.raises(ValidationError):
            path_service.displacement(z, z)

    def test_rejects_gap_change_when_pinned(self, path_service: PathService):
        """Test gap changes are only allowed with free endpoints."""
        z = PathZ((0, 1, 0))
        zp = PathZ((1, 0, -1))

        with pytest.raises(ValidationError):
            path_service.displacement(z, zp)
        assert path_service.displacement(z, zp, pinned=False) == (1, -1, -1)


class TestShapesAndEnumeration:
    """Tests for shape conversions and enumeration."""

    @pytest.fixture
    def path_service(self) -> PathService:
        return PathService()

    def test_shape_conversions(self, path_service: PathService):
        """Test shape_of, anchor and path_from_shape agree."""
        z = PathZ((3, 4, 3, 4))

        assert path_service.shape_of(z) == StepShape((1, -1, 1))
        assert path_service.anchor(z) == ShapeBar.from_steps((1, -1, 1))
        assert path_service.path_from_shape(3, path_service.anchor(z)) == z

    def test_iter_shapes_order(self, path_service: PathService):
        """Test the six shapes of K=4, h=0 in lexicographic order."""
        shapes = [s.steps for s in path_service.iter_shapes(make_params(4, 0))]

        assert len(shapes) == 6
        assert shapes[0] == (-1, -1, 1, 1)
        assert shapes[-1] == (1, 1, -1, -1)
        assert shapes == sorted(shapes)

    def test_enumeration_cap(self, path_service: PathService):
        """Test enumeration beyond the cap raises CapacityError."""
        with pytest.raises(CapacityError) as exc_info:
            next(path_service.enumerate_anchored(make_params(25, 1)))

        assert exc_info.value.requested == 25

    def test_free_enumeration(self, path_service: PathService):
        """Test all 2^K anchored paths of C_K."""
        paths = list(path_service.enumerate_anchored_free(3))

        assert len(paths) == 8
        assert all(z.z1 == 0 for z in paths)


class TestPathJson:
    """Tests for the JSON path codec."""

    @pytest.fixture
    def path_service(self) -> PathService:
        return PathService()

    def test_to_json(self, path_service: PathService):
        assert path_service.path_to_json(PathZ((0, 1, 0))) == "[0, 1, 0]"
        assert path_service.path_from_json("[0, -1, 0]") == PathZ((0, -1, 0))

    @pytest.mark.parametrize("payload", ["[0, 1", '["a", "b"]', "[0, 2]", '{"z": [0, 1]}', "[true, 0]"])
    def test_invalid_json(self, path_service: PathService, payload: str):
        """Test malformed payloads raise ValidationError."""
        with pytest.raises(ValidationError):
            path_service.path_from_json(payload)
