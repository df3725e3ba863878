import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poisson_ccr.cone import orthant, wedge
from poisson_ccr.l2grid import (
    Grid,
    GridError,
    GridFunction,
    Window,
    adjoint_shift,
    inner,
    restrict,
    shift,
    supported_in,
)

GRIDS = {
    "line": Grid(orthant(1), (12,), (0.5,)),
    "plane": Grid(orthant(2), (7, 5), (0.5, 0.25)),
    "wedge": Grid(wedge(), (6, 6), (0.5, 0.5), intensity=0.5),
}


def loop_inner(f, g):
    """Reference pairing by an explicit cell loop."""
    total = 0j
    for idx in np.ndindex(f.grid.shape):
        total += f.values[idx] * np.conj(g.values[idx]) * f.grid.cell_measure
    return total


@st.composite
def grid_and_room(draw):
    name = draw(st.sampled_from(sorted(GRIDS)))
    grid = GRIDS[name]
    room = tuple(draw(st.integers(1, n // 2)) for n in grid.counts)
    return grid, room


@st.composite
def function_in(draw, grid, room):
    shape = tuple(room)
    size = int(np.prod(shape))
    parts = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
    re = draw(st.lists(parts, min_size=size, max_size=size))
    im = draw(st.lists(parts, min_size=size, max_size=size))
    v = np.zeros(grid.shape, dtype=complex)
    v[tuple(slice(0, r) for r in shape)] = (np.array(re) + 1j * np.array(im)).reshape(shape)
    return GridFunction(grid, v)


@st.composite
def setup(draw):
    grid, room = draw(grid_and_room())
    f = draw(function_in(grid, room))
    g = draw(function_in(grid, room))
    free = tuple(n - r for n, r in zip(grid.counts, room))
    s = tuple(draw(st.integers(0, k)) for k in free)
    t = tuple(draw(st.integers(0, k - si)) for k, si in zip(free, s))
    return grid, f, g, s, t


class TestWindow:
    def test_volume(self):
        assert Window([0.0, 1.0], [2.0, 4.0]).volume == 6.0

    def test_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            Window([0.0], [0.0])

    def test_half_open(self):
        w = Window([0.0], [1.0])
        assert w.contains([[0.0], [0.999], [1.0]]).tolist() == [True, True, False]


class TestGrid:
    def test_orthant_cells_are_boxes(self, line1):
        assert line1.cell_measure == 1.0
        assert line1.locate([[0.0], [0.5], [1.0], [7.99], [8.0], [-0.1]]).tolist() == [0, 0, 1, 7, -1, -1]

    def test_wedge_cell_measure(self, wedge_grid):
        # |det [[1,-1],[1,1]]| = 2, step area 0.25, intensity 0.5
        assert wedge_grid.cell_measure == pytest.approx(0.25)

    def test_lattice_alignment(self, plane):
        assert plane.lattice_steps([1.0, 0.5]) == (2, 1)
        with pytest.raises(GridError, match="integer multiple"):
            plane.lattice_steps([0.3, 0.0])
        with pytest.raises(GridError, match="cone"):
            plane.lattice_steps([-0.5, 0.0])

    def test_needs_simplicial_cone(self):
        from poisson_ccr.cone import PolyhedralCone

        three = PolyhedralCone(2, [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="simplicial"):
            Grid(three, (4, 4), (1.0, 1.0))


class TestInner:
    def test_single_unit_cell(self, line1):
        f = GridFunction.indicator(line1, [0], [1])
        assert inner(f, f) == 1

    def test_orthogonal_supports(self, line1):
        f = GridFunction.indicator(line1, [0], [2])
        g = GridFunction.indicator(line1, [2], [5], 3 - 1j)
        assert inner(f, g) == 0

    def test_complex_value(self, line1):
        f = GridFunction.indicator(line1, [0], [2], 1 + 1j)
        g = GridFunction.indicator(line1, [0], [2])
        assert inner(f, g) == 2 + 2j

    def test_conjugate_linear_in_second_slot(self, line1):
        f = GridFunction.indicator(line1, [0], [1])
        assert inner(f, f * 1j) == -1j
        assert inner(f * 1j, f) == 1j

    def test_grid_mismatch(self, line1, fine1):
        with pytest.raises(ValueError, match="different grids"):
            inner(GridFunction.zeros(line1), GridFunction.zeros(fine1))

    @given(setup())
    def test_matches_loop(self, s):
        grid, f, g, *_ = s
        assert inner(f, g) == pytest.approx(loop_inner(f, g), rel=1e-12, abs=1e-12)


class TestShift:
    def test_zero_shift(self, line1):
        f = GridFunction.indicator(line1, [1], [3], 2j)
        assert shift(f, [0.0]).equals(f)

    def test_translation(self, line1):
        f = GridFunction.indicator(line1, [0], [1])
        assert shift(f, [1.0]).equals(GridFunction.indicator(line1, [1], [2]))

    def test_overflow_is_an_error(self, line1):
        f = GridFunction.indicator(line1, [0], [8])
        with pytest.raises(GridError, match="off the grid"):
            shift(f, [1.0])

    def test_misaligned(self, fine1):
        with pytest.raises(GridError):
            shift(GridFunction.zeros(fine1), [0.1])

    @given(setup())
    def test_isometry_exact(self, s):
        grid, f, g, a, _ = s
        va = grid.lattice_vector(a)
        assert inner(shift(f, va), shift(g, va)) == inner(f, g)
        assert shift(f, va).norm() == f.norm()

    @given(setup())
    def test_semigroup_exact(self, s):
        grid, f, _, a, b = s
        va, vb = grid.lattice_vector(a), grid.lattice_vector(b)
        ab = grid.lattice_vector(tuple(x + y for x, y in zip(a, b)))
        assert shift(shift(f, va), vb).equals(shift(f, ab))

    @given(setup())
    def test_range(self, s):
        grid, f, _, a, _ = s
        va = grid.lattice_vector(a)
        vf = shift(f, va)
        assert supported_in(vf, lower=va)
        assert not np.any(restrict(vf, upper=va).values)


class TestAdjoint:
    @given(setup())
    def test_left_inverse(self, s):
        grid, f, _, a, _ = s
        va = grid.lattice_vector(a)
        assert adjoint_shift(shift(f, va), va).equals(f)

    @pytest.mark.parametrize("name", sorted(GRIDS))
    def test_range_projection(self, name):
        grid = GRIDS[name]
        one = GridFunction.constant(grid, 1.0)
        a = grid.lattice_vector((1,) * grid.dimension)
        projected = shift(adjoint_shift(one, a), a)
        assert projected.equals(restrict(one, lower=a))
        expected = np.zeros(grid.shape)
        expected[(slice(1, None),) * grid.dimension] = 1
        assert np.array_equal(projected.values.real, expected)

    @given(setup())
    def test_pairing(self, s):
        grid, f, g, a, _ = s
        va = grid.lattice_vector(a)
        # g lives near the origin; shift it by a so that V_a^* sees something
        h = shift(g, va)
        lhs = inner(adjoint_shift(h, va), f)
        rhs = inner(h, shift(f, va))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))
        assert abs(inner(adjoint_shift(f, va), g) - inner(f, shift(g, va))) <= 1e-12 * max(1.0, abs(inner(f, shift(g, va))))


class TestRestrict:
    def test_empty_region(self, line1):
        f = GridFunction.constant(line1, 1.0)
        assert not np.any(restrict(f, upper=[0.0]).values)

    def test_prefix(self, line1):
        f = GridFunction.indicator(line1, [0], [3])
        assert restrict(f, upper=[2.0]).equals(GridFunction.indicator(line1, [0], [2]))

    def test_order_violation(self, plane):
        with pytest.raises(GridError):
            restrict(GridFunction.zeros(plane), [1.0, 0.0], [0.0, 1.0])

    def test_wedge_region_is_lattice_block(self, wedge_grid):
        a = wedge_grid.lattice_vector((2, 1))
        mask = wedge_grid.region_mask(upper=a)
        expected = np.ones(wedge_grid.shape, dtype=bool)
        expected[2:, 1:] = False
        assert np.array_equal(mask, expected)

    @given(setup(), st.data())
    def test_partition_identity(self, s, data):
        grid, f, _, a, b = s
        mid = tuple(x + y for x, y in zip(a, b))
        hi = tuple(m + data.draw(st.integers(0, n - m)) for m, n in zip(mid, grid.counts))
        A, B, C = (grid.lattice_vector(k) for k in (a, mid, hi))
        whole = GridFunction.constant(grid, 1.0) + f
        parts = restrict(whole, A, B) + restrict(whole, B, C)
        assert parts.equals(restrict(whole, A, C))


class TestGridFunction:
    def test_from_cells(self, plane):
        f = GridFunction.from_cells(plane, [((1, 2), 0.5, -1.0), (0, 2.0, 0.0)])
        assert f.values[1, 2] == 0.5 - 1j
        assert f.values[0, 0] == 2.0

    def test_nonfinite(self, line1):
        with pytest.raises(ValueError):
            GridFunction(line1, np.full(8, np.nan))

    def test_evaluate(self, line1):
        f = GridFunction.indicator(line1, [2], [4], 3.0)
        assert f.evaluate([[2.5], [4.0], [-1.0]]).tolist() == [3.0, 0.0, 0.0]

    def test_immutable(self, line1):
        f = GridFunction.zeros(line1)
        with pytest.raises(ValueError):
            f.values[0] = 1
