import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quarticsos.errors import DimensionMismatch
from quarticsos.model import (
    CubicModel,
    SymTensor3,
    evaluate,
    gradient,
    hessian,
    norm_bundle,
    quick_norms,
    shifted_expansion,
)
from quarticsos.problems import make_euclidean_example

from reference import fd_derivative, monomial_value, random_model, random_sym_array, unit_vectors


class TestSymTensor3:
    def test_permutation_invariance(self, rng):
        T = SymTensor3(random_sym_array(rng, 4))
        for i, j, k in [(0, 1, 2), (1, 3, 3), (2, 0, 0)]:
            vals = {T[p] for p in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]}
            assert len(vals) == 1

    def test_from_unique_and_frobenius_multiplicity(self):
        T = SymTensor3.from_unique(3, {(0, 0, 0): 2.0, (0, 1, 1): 1.0, (0, 1, 2): 3.0})
        assert T[1, 0, 1] == 1.0 and T[2, 1, 0] == 3.0
        expected = 2.0**2 + 3 * 1.0**2 + 6 * 3.0**2
        assert T.frobenius_norm() ** 2 == pytest.approx(expected)

    def test_unordered_triple_rejected(self):
        with pytest.raises(ValueError):
            SymTensor3.from_unique(2, {(1, 0, 0): 1.0})

    def test_nonsymmetric_rejected(self):
        a = np.zeros((2, 2, 2))
        a[0, 0, 1] = 1.0
        with pytest.raises(ValueError):
            SymTensor3(a)

    def test_symmetrize_is_exactly_symmetric(self, rng):
        T = SymTensor3.symmetrize(rng.normal(size=(4, 4, 4)))
        d = T.data
        for p in [(1, 0, 2), (2, 1, 0), (0, 2, 1)]:
            np.testing.assert_array_equal(d, np.transpose(d, p))

    def test_contractions(self, rng):
        T = SymTensor3(random_sym_array(rng, 3))
        s = rng.normal(size=3)
        np.testing.assert_allclose(T.apply1(s), np.einsum("ijk,k->ij", T.data, s))
        np.testing.assert_allclose(T.apply2(s), np.einsum("ijk,j,k->i", T.data, s, s))
        assert T.apply3(s) == pytest.approx(np.einsum("ijk,i,j,k->", T.data, s, s, s))


class TestCubicModel:
    def test_quartic_only(self):
        m = CubicModel(0.0, np.zeros(3), np.zeros((3, 3)), SymTensor3.zeros(3), 4.0)
        assert evaluate(m, np.array([1.0, 0.0, 0.0])) == 1.0

    def test_euclidean_ring_value(self):
        m = make_euclidean_example(1.0)
        s = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
        assert evaluate(m, s) == pytest.approx(-1.0, abs=1e-14)
        np.testing.assert_allclose(gradient(m, s), 0.0, atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_value_matches_monomial_expansion(self, rng, n):
        for _ in range(10):
            m = random_model(rng, n)
            s = rng.normal(size=n)
            ref = monomial_value(m, s)
            assert evaluate(m, s) == pytest.approx(ref, rel=1e-12, abs=1e-12)

    def test_trivial_derivatives(self):
        m = CubicModel(0.0, np.zeros(3), np.eye(3), SymTensor3.zeros(3), 1.0)
        np.testing.assert_array_equal(gradient(m, np.zeros(3)), 0.0)
        np.testing.assert_array_equal(hessian(m, np.zeros(3)), np.eye(3))

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_derivatives_match_finite_differences(self, rng, n):
        for _ in range(5):
            m = random_model(rng, n)
            s = rng.normal(size=n)
            np.testing.assert_allclose(gradient(m, s), fd_derivative(m.value, s), atol=1e-6)
            np.testing.assert_allclose(hessian(m, s), fd_derivative(m.gradient, s), atol=1e-6)

    def test_quartic_hessian_term_exact(self, rng):
        m = CubicModel(0.0, rng.normal(size=3), np.zeros((3, 3)), SymTensor3.zeros(3), 2.5)
        s = rng.normal(size=3)
        diff = hessian(m, s) - hessian(m, np.zeros(3))
        np.testing.assert_array_equal(diff, 2.5 * (2.0 * np.outer(s, s) + (s @ s) * np.eye(3)))

    def test_dimension_mismatch(self):
        m = CubicModel(0.0, np.zeros(2), np.eye(2), SymTensor3.zeros(2), 1.0)
        with pytest.raises(DimensionMismatch):
            evaluate(m, np.zeros(3))
        with pytest.raises(DimensionMismatch):
            CubicModel(0.0, np.zeros(2), np.eye(3), SymTensor3.zeros(2), 1.0)

    def test_invalid_sigma_and_asymmetric_h(self):
        with pytest.raises(ValueError):
            CubicModel(0.0, np.zeros(2), np.eye(2), SymTensor3.zeros(2), 0.0)
        with pytest.raises(ValueError):
            CubicModel(0.0, np.zeros(2), np.array([[1.0, 1.0], [0.0, 1.0]]), SymTensor3.zeros(2), 1.0)

    def test_immutable(self):
        m = CubicModel(0.0, np.zeros(2), np.eye(2), SymTensor3.zeros(2), 1.0)
        with pytest.raises(ValueError):
            m.g[0] = 1.0


class TestShiftedExpansion:
    def test_origin_shift(self, rng):
        m = random_model(rng, 3)
        e = shifted_expansion(m, np.zeros(3))
        np.testing.assert_array_equal(e.grad, m.g)
        np.testing.assert_array_equal(e.G, m.H)
        v = rng.normal(size=3)
        assert e.value(v) == pytest.approx(m.value(v) - m.f0, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_two_point_identity(self, rng, n):
        m = random_model(rng, n)
        s = rng.normal(size=n)
        e = shifted_expansion(m, s)
        for _ in range(200):
            v = rng.normal(size=n) * rng.uniform(0.1, 3.0)
            q = m.value(s + v) - m.value(s)
            tol = 1e-10 * (1.0 + abs(m.value(s + v)))
            assert abs(e.value(v) - q) <= tol
            assert abs(e.value_expanded(v) - q) <= tol
            assert abs(e.as_model().value(v) + m.sigma * (s @ v) * (v @ v) - q) <= tol

    def test_qqr_expansion(self, rng):
        m = make_euclidean_example(1.0)
        s = rng.normal(size=3)
        e = shifted_expansion(m, s)
        assert e.T.is_zero(0.0)
        np.testing.assert_allclose(e.G, m.H + m.sigma * (s @ s) * np.eye(3))


class TestNormBundle:
    def test_rank_one(self):
        u = np.array([1.0, 2.0, 2.0]) / 3.0
        T = SymTensor3.rank_one(3.0, u)
        m = CubicModel(0.0, np.ones(3), np.eye(3), T, 1.0)
        nb = norm_bundle(m)
        assert nb.t_frob == pytest.approx(3.0, abs=1e-12)
        assert nb.t_spec_lb == pytest.approx(3.0, abs=1e-8)

    def test_hessian_norms(self):
        m = CubicModel(0.0, np.zeros(2), np.diag([2.0, -5.0]), SymTensor3.zeros(2), 1.0)
        nb = norm_bundle(m)
        assert nb.h_norm == pytest.approx(5.0)
        assert nb.lambda_star == pytest.approx(5.0)
        assert quick_norms(m).h_norm == pytest.approx(5.0)

    def test_spectral_lower_bound_against_sampling(self, rng):
        for _ in range(3):
            m = random_model(rng, 3)
            nb = norm_bundle(m, restarts=8)
            U = unit_vectors(rng, 3, 100000)
            sampled = np.max(np.abs(np.einsum("ijk,ni,nj,nk->n", m.T.data, U, U, U)))
            # the lower bound is attained at a unit vector, so it sits between the sample max and the true norm
            assert sampled - 1e-4 * sampled <= nb.t_spec_lb <= nb.t_frob + 1e-12
            assert 0.0 <= nb.lambda_star <= nb.h_norm

    def test_restarts_validated(self, rng):
        with pytest.raises(ValueError):
            norm_bundle(random_model(rng, 2), restarts=0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 10**6))
    def test_bundle_invariants(self, n, seed):
        m = random_model(np.random.default_rng(seed), n)
        nb = norm_bundle(m, restarts=2)
        assert 0.0 <= nb.t_spec_lb <= nb.t_frob
        assert 0.0 <= nb.lambda_star <= nb.h_norm + 1e-12
