import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quarticsos.errors import NonSymmetric
from quarticsos.linalg import CERTIFIED, VIOLATED, default_psd_tol, jacobi_eigh, psd_check


def _sym(a):
    return 0.5 * (a + a.T)


class TestJacobi:
    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(1, 7).flatmap(
            lambda n: arrays(np.float64, (n, n), elements=st.floats(-1e3, 1e3, allow_nan=False, width=64))
        )
    )
    def test_matches_lapack_eigenvalues(self, a):
        a = _sym(a)
        w, V = jacobi_eigh(a)
        scale = max(1.0, np.linalg.norm(a))
        np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * scale)
        np.testing.assert_allclose(V.T @ V, np.eye(a.shape[0]), atol=1e-10)
        np.testing.assert_allclose(a @ V, V * w, atol=1e-9 * scale)

    def test_ascending_order(self, rng):
        a = _sym(rng.normal(size=(6, 6)))
        w, _ = jacobi_eigh(a)
        assert np.all(np.diff(w) >= 0)

    def test_diagonal_and_empty(self):
        w, V = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
        np.testing.assert_array_equal(w, [-1.0, 2.0, 3.0])
        w0, _ = jacobi_eigh(np.zeros((0, 0)))
        assert w0.size == 0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            jacobi_eigh(np.zeros((2, 3)))


class TestPsdCheck:
    def test_identity(self):
        m, v = psd_check(np.eye(4))
        assert v == CERTIFIED
        assert m == pytest.approx(1.0)

    def test_small_negative_violated(self):
        assert psd_check(np.diag([1.0, -1e-3]), tol=1e-8)[1] == VIOLATED

    def test_all_eights(self):
        m, v = psd_check(np.full((3, 3), 8.0))
        assert abs(m) <= 1e-10
        assert v == CERTIFIED

    def test_default_tolerance_scales(self):
        a = np.diag([1e6, -1e-3])
        assert default_psd_tol(a) == pytest.approx(1e-8 * np.linalg.norm(a))
        assert psd_check(a)[1] == CERTIFIED
        assert psd_check(a, tol=1e-8)[1] == VIOLATED

    def test_nonsymmetric(self):
        with pytest.raises(NonSymmetric):
            psd_check(np.array([[1.0, 2.0], [0.0, 1.0]]))
