import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_two_species_step
from kinstab.core import Grid1D, State, WeightParams, weighted_norm
from kinstab.errors import ConvergenceError, DimensionError, ParameterError
from kinstab.extensions import (
    MonotoneG,
    TwoSpeciesState,
    lyapunov,
    pairing_check,
    step_nonlinear,
    step_two_species,
    two_species_quantity,
)
from kinstab.operators import DifferenceFactor, assemble_dtkd, dirichlet_laplacian
from kinstab.steppers import SchemeKind, SchemeSpec, step


class TestMonotoneG:
    def test_rejects_decreasing(self):
        with pytest.raises(ParameterError):
            MonotoneG(lambda u: -np.asarray(u))

    def test_slope(self):
        assert MonotoneG.linear(3.0).slope == pytest.approx(3.0)
        assert MonotoneG.cubic().slope == pytest.approx(27.0, rel=1e-2)

    def test_range_check(self):
        with pytest.raises(ParameterError):
            MonotoneG.cubic().check_range([4.0])

    @pytest.mark.parametrize("name", ["cubic", "arctan", "exp_minus_one"])
    def test_primitive_vs_quadrature(self, name):
        mg = getattr(MonotoneG, name)()
        numeric = MonotoneG(mg.g, None, mg.lo, mg.hi)
        x = np.array([-1.3, 0.0, 0.4, 2.0])
        np.testing.assert_allclose(numeric.primitive(x), mg.primitive(x), rtol=1e-10, atol=1e-12)

    def test_primitive_normalized(self):
        mg = MonotoneG(lambda u: np.asarray(u) + 1.0, lambda u: 0.5 * np.asarray(u) ** 2 + np.asarray(u) + 7.0)
        assert mg.primitive(np.array([0.0]))[0] == 0.0


class TestLyapunov:
    def test_linear(self, rng):
        c = 2.5
        s = State(rng.standard_normal(6), rng.standard_normal(6))
        g = Grid1D(0.0, 7.0, 6)  # h = 1 matches the unweighted sums
        expected = 0.5 * weighted_norm(s, WeightParams(c, 1.0), g) ** 2
        assert lyapunov(s, MonotoneG.linear(c)) == pytest.approx(expected, rel=1e-12)

    def test_zero(self):
        assert lyapunov(State(np.zeros(4), np.zeros(4)), MonotoneG.cubic()) == 0.0

    def test_cubic_value(self):
        assert lyapunov(State([1.0], [2.0]), MonotoneG.cubic()) == pytest.approx(2.25)

    def test_outside_range(self):
        with pytest.raises(ParameterError):
            lyapunov(State([5.0], [0.0]), MonotoneG.cubic())


class TestStepNonlinear:
    def test_linear_reduction(self, rng):
        n, c, alpha, tau = 12, 3.0, 2.0, 0.05
        g = Grid1D(0.0, 1.0, n)
        spec = SchemeSpec(SchemeKind.IMPLICIT_DIFFUSION, g, WeightParams(c, alpha), d=0.2)
        s = State(rng.standard_normal(n), rng.standard_normal(n))
        a = step_nonlinear(spec.implicit_op, MonotoneG.linear(c), s, tau, alpha)
        b = step(spec, s, tau)
        np.testing.assert_allclose(a.U, b.U, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(a.V, b.V, rtol=1e-12, atol=1e-14)

    def test_zero_stays_zero(self):
        L = assemble_dtkd(DifferenceFactor.identity(5))
        out = step_nonlinear(L, MonotoneG.cubic(), State(np.zeros(5), np.zeros(5)), 0.1, 1.0)
        assert not np.any(out.U) and not np.any(out.V)

    def test_fixed_point_residual(self, rng):
        # the converged iterate satisfies the nonlinear implicit equations
        n, tau, alpha = 8, 0.3, 5.0
        L = assemble_dtkd(DifferenceFactor(rng.uniform(0.5, 2, n + 1)))
        mg = MonotoneG.arctan()
        s = State(rng.uniform(-2, 2, n), rng.uniform(-2, 2, n))
        out = step_nonlinear(L, mg, s, tau, alpha)
        r1 = (out.U - s.U) + (out.V - s.V) + tau * L.matvec(out.U)
        r2 = (out.V - s.V) - tau * alpha * (mg.g(out.U) - out.V)
        assert np.max(np.abs(r1)) < 1e-11 and np.max(np.abs(r2)) < 1e-11

    def test_cubic_lyapunov_small_tau(self, rng):
        n = 10
        L = assemble_dtkd(DifferenceFactor.identity(n))
        mg = MonotoneG.cubic()
        s = State(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n))
        prev = lyapunov(s, mg)
        for _ in range(1000):
            s = step_nonlinear(L, mg, s, 1e-4, 2.0)
            cur = lyapunov(s, mg)
            assert cur <= prev + 1e-8
            prev = cur

    def test_non_convergence_reported(self, rng):
        L = assemble_dtkd(DifferenceFactor.identity(4))
        with pytest.raises(ConvergenceError) as exc:
            step_nonlinear(L, MonotoneG.exp_minus_one(), State(rng.uniform(0, 2, 4), np.zeros(4)), 5.0, 50.0,
                           max_iter=2)
        assert exc.value.residual > 0

    def test_dense_and_none_operators(self, rng):
        mg = MonotoneG.arctan()
        s = State(rng.standard_normal(3), rng.standard_normal(3))
        L = dirichlet_laplacian(3, 0.25, 1.0)
        a = step_nonlinear(L, mg, s, 0.1, 1.0)
        b = step_nonlinear(L.to_dense(), mg, s, 0.1, 1.0)
        np.testing.assert_allclose(a.U, b.U, rtol=1e-12)
        c = step_nonlinear(None, mg, s, 0.1, 1.0)
        assert c.U.shape == (3,)


class TestPairing:
    def test_constant_only_boundary(self):
        f = DifferenceFactor([2.0, 1.0, 1.0, 3.0])
        mg = MonotoneG.cubic()
        u = np.full(3, 1.5)
        assert pairing_check(f, mg, u) == pytest.approx(2.0 * 1.5 * 1.5**3 + 3.0 * 1.5 * 1.5**3)

    def test_identity_g(self, rng):
        f = DifferenceFactor.identity(7)
        u = rng.standard_normal(7)
        mg = MonotoneG.linear(1.0)
        L = assemble_dtkd(f)
        assert pairing_check(f, mg, u) == pytest.approx(u @ L.matvec(u), rel=1e-12)
        assert pairing_check(f, mg, u) >= 0

    def test_explicit_sum(self, rng):
        k = rng.uniform(0.1, 2, 6)
        f = DifferenceFactor(k)
        u = rng.uniform(-1, 1, 5)
        gu = np.arctan(u)
        expected = k[0] * u[0] * gu[0] + np.sum(k[1:-1] * np.diff(u) * np.diff(gu)) + k[-1] * u[-1] * gu[-1]
        assert pairing_check(f, MonotoneG.arctan(), u) == pytest.approx(expected, rel=1e-13)


class TestTwoSpecies:
    def make(self, rng, n, a1=1.0, a2=2.0, c1=1.5, c2=0.5):
        return TwoSpeciesState(rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal(n), a1, a2, c1, c2)

    def test_symmetry(self, rng):
        n = 6
        V = rng.standard_normal(n)
        ts = TwoSpeciesState(rng.standard_normal(n), V, V.copy(), 1.3, 1.3, 0.7, 0.7)
        L = dirichlet_laplacian(n, 1 / 7, 1.0)
        for _ in range(20):
            ts = step_two_species(ts, L, 0.05)
            np.testing.assert_array_equal(ts.V1, ts.V2)

    def test_zero(self):
        z = np.zeros(4)
        ts = step_two_species(TwoSpeciesState(z, z, z, 1, 1, 1, 1), dirichlet_laplacian(4, 0.2, 1.0), 0.1)
        assert two_species_quantity(ts) == 0.0

    def test_dense_oracle(self, rng):
        n = 8
        L = dirichlet_laplacian(n, 1 / 9, 1.0)
        ts = self.make(rng, n)
        out = step_two_species(ts, L, 0.07)
        U, V1, V2 = dense_two_species_step(ts, L.to_dense(), 0.07)
        for a, b in ((out.U, U), (out.V1, V1), (out.V2, V2)):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_quantity_values(self):
        one = np.ones(1)
        assert two_species_quantity(TwoSpeciesState(one, one, one, 1, 1, 2.0, 3.0)) == pytest.approx(11.0)
        ts = TwoSpeciesState(np.array([1.0, 2.0]), np.array([3.0]).repeat(2), np.zeros(2), 1, 1, 1.0, 1.0)
        assert two_species_quantity(ts) == pytest.approx(5 + 18)

    def test_validation(self):
        with pytest.raises(DimensionError):
            TwoSpeciesState(np.ones(2), np.ones(3), np.ones(2), 1, 1, 1, 1)
        with pytest.raises(ParameterError):
            TwoSpeciesState(np.ones(2), np.ones(2), np.ones(2), 0, 1, 1, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([1e-3, 1e-1, 1.0]))
    def test_quantity_nonincreasing(self, seed, tau):
        r = np.random.default_rng(seed)
        n = int(r.integers(1, 12))
        ts = TwoSpeciesState(r.standard_normal(n), r.standard_normal(n), r.standard_normal(n),
                             *r.uniform(0.05, 10, 2), *r.uniform(0.05, 10, 2))
        L = dirichlet_laplacian(n, 1 / (n + 1), r.uniform(0, 2))
        prev = two_species_quantity(ts)
        for _ in range(10):
            ts = step_two_species(ts, L, tau)
            cur = two_species_quantity(ts)
            assert cur <= prev * (1 + 1e-12)
            prev = cur
