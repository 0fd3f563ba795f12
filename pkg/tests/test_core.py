import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kinstab.core import (
    Boundary,
    Grid1D,
    State,
    WeightParams,
    desymmetrize,
    grid_norm_p,
    product_norm,
    symmetrize,
    weighted_norm,
)
from kinstab.errors import DimensionError, NumericError, ParameterError

finite = st.floats(-1e3, 1e3, allow_nan=False)


def unit_grid(n, h=1.0):
    return Grid1D(0.0, n * h, n, Boundary.PERIODIC)


class TestGrid:
    def test_dirichlet_spacing(self):
        g = Grid1D.dirichlet(0.0, 1.0, 10)
        assert g.n_nodes == 9
        assert g.h == pytest.approx(0.1)
        np.testing.assert_allclose(g.x, np.linspace(0.1, 0.9, 9))

    @pytest.mark.parametrize("a,b,n", [(0.0, 1.0, 7), (-2.0, 3.0, 5050), (0.3, 0.7, 3)])
    def test_dirichlet_cover(self, a, b, n):
        g = Grid1D(a, b, n, Boundary.DIRICHLET)
        assert n * g.h + g.h == pytest.approx(b - a, rel=2.3e-16, abs=0)

    def test_periodic_spacing(self):
        g = Grid1D.periodic(-1.0, 3.0, 8)
        assert g.h == 0.5
        assert g.x[0] == -1.0 and g.x[-1] == 2.5

    def test_point(self):
        g = Grid1D.point()
        assert g.n_nodes == 1 and g.h == 1.0

    @pytest.mark.parametrize("args", [(1.0, 0.0, 3, Boundary.DIRICHLET), (0.0, 1.0, 0, Boundary.PERIODIC)])
    def test_rejects_bad(self, args):
        with pytest.raises(ParameterError):
            Grid1D(*args)


class TestGridNorm:
    def test_zero(self):
        assert grid_norm_p(np.zeros(4), unit_grid(4)) == 0.0

    def test_two_norm_half_spacing(self):
        assert grid_norm_p([1.0, 1.0], unit_grid(2, 0.5), 2) == pytest.approx(1.0)

    def test_inf(self):
        assert grid_norm_p([3.0, -4.0], unit_grid(2), np.inf) == 4.0

    def test_one(self):
        assert grid_norm_p([3.0, -4.0], unit_grid(2, 0.5), 1) == 3.5

    def test_general_p(self):
        assert grid_norm_p([3.0, 4.0], unit_grid(2), 3) == pytest.approx((27 + 64) ** (1 / 3))

    def test_complex(self):
        assert grid_norm_p([3j, 4.0], unit_grid(2), 2) == pytest.approx(5.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            grid_norm_p(np.ones(3), unit_grid(4))

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite), finite,
           st.sampled_from([1, 2, 3.5, np.inf]))
    def test_seminorm_axioms(self, f, g, s, p):
        grid = unit_grid(6, 0.3)
        nf, ng = grid_norm_p(f, grid, p), grid_norm_p(g, grid, p)
        assert grid_norm_p(s * f, grid, p) == pytest.approx(abs(s) * nf, rel=1e-12, abs=1e-12)
        assert grid_norm_p(f + g, grid, p) <= nf + ng + 1e-9 * (1 + nf + ng)


class TestWeightedNorm:
    def test_zero(self):
        s = State(np.zeros(3), np.zeros(3))
        assert weighted_norm(s, WeightParams(5.0, 1.0), unit_grid(3)) == 0.0

    def test_single_node(self):
        s = State([1.0], [1.0])
        assert weighted_norm(s, WeightParams(5.0, 0.1), Grid1D.point()) == pytest.approx(np.sqrt(6.0))

    def test_c_one_is_product_norm(self, rng):
        s = State(rng.standard_normal(5), rng.standard_normal(5))
        g = unit_grid(5, 0.2)
        assert weighted_norm(s, WeightParams(1.0, 1.0), g) == pytest.approx(product_norm(s, g), rel=1e-15)

    def test_rejects_nonpositive_c(self):
        with pytest.raises(ParameterError):
            WeightParams(0.0, 1.0)

    def test_alpha_zero_allowed_but_check_fails(self):
        w = WeightParams(1.0, 0.0)
        with pytest.raises(ParameterError):
            w.check()

    @settings(max_examples=80, deadline=None)
    @given(arrays(float, 7, elements=finite), arrays(float, 7, elements=finite), st.floats(1e-3, 1e3))
    def test_symmetrized_identity(self, U, V, c):
        g = unit_grid(7, 0.1)
        s = State(U, V)
        w = WeightParams(c, 1.0)
        lhs = weighted_norm(s, w, g)
        rhs = product_norm(symmetrize(s, w), g)
        assert lhs == pytest.approx(rhs, rel=1e-14, abs=1e-300)


class TestSymmetrize:
    def test_identity_for_c_one(self, rng):
        s = State(rng.standard_normal(4), rng.standard_normal(4))
        out = symmetrize(s, WeightParams(1.0, 1.0))
        np.testing.assert_array_equal(out.U, s.U)
        np.testing.assert_array_equal(out.V, s.V)

    def test_value(self):
        assert symmetrize(State([2.0], [0.0]), WeightParams(4.0, 1.0)).U[0] == 4.0

    @pytest.mark.parametrize("c", [0.1, 2.0, 5.0, 37.0])
    def test_round_trip(self, rng, c):
        s = State(rng.standard_normal(50), rng.standard_normal(50))
        w = WeightParams(c, 1.0)
        back = desymmetrize(symmetrize(s, w), w)
        np.testing.assert_array_max_ulp(back.U, s.U, maxulp=1)
        np.testing.assert_array_equal(back.V, s.V)


class TestState:
    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            State(np.zeros(3), np.zeros(4))

    def test_require_finite(self):
        with pytest.raises(NumericError, match="step 7"):
            State([np.nan], [0.0]).require_finite(step=7)

    def test_equilibrium(self):
        s = State.equilibrium([1.0, 2.0], 3.0)
        np.testing.assert_array_equal(s.V, [3.0, 6.0])
