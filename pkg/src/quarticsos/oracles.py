"""Objective oracles with exact derivatives up to third order."""

import numpy as np

from .errors import DimensionMismatch, OracleFailure
from .model import CubicModel, SymTensor3

__all__ = ["ObjectiveOracle", "FunctionOracle", "LeastSquaresOracle", "taylor_model"]


class ObjectiveOracle:
    """Interface: ``value``, ``gradient``, ``hessian`` and ``third`` at a point."""

    dim = None

    def _x(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"point has shape {x.shape}, oracle dimension is {self.dim}")
        return x

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError

    def third_array(self, x):
        raise NotImplementedError

    def third(self, x):
        return SymTensor3.symmetrize(self.third_array(x))


class FunctionOracle(ObjectiveOracle):
    """Oracle from plain callables; ``third`` defaults to zero."""

    def __init__(self, dim, value, gradient, hessian, third=None):
        self.dim = int(dim)
        self._f, self._g, self._h, self._t = value, gradient, hessian, third

    def value(self, x):
        return float(self._f(self._x(x)))

    def gradient(self, x):
        return np.asarray(self._g(self._x(x)), dtype=float)

    def hessian(self, x):
        return np.asarray(self._h(self._x(x)), dtype=float)

    def third_array(self, x):
        if self._t is None:
            return np.zeros((self.dim,) * 3)
        return np.asarray(self._t(self._x(x)), dtype=float)


class LeastSquaresOracle(ObjectiveOracle):
    """``f(x) = sum_i r_i(x)^2`` from residual derivatives.

    ``residuals(x)`` returns ``(r, J, R2, R3)`` with shapes ``(m,)``,
    ``(m, n)``, ``(m, n, n)`` and ``(m, n, n, n)``.
    """

    def __init__(self, dim, residuals):
        self.dim = int(dim)
        self._res = residuals
        self._cache = (None, None)

    def _eval(self, x):
        x = self._x(x)
        key = x.tobytes()
        if self._cache[0] != key:
            out = self._res(x)
            self._cache = (key, out)
        return self._cache[1]

    def value(self, x):
        r = self._eval(x)[0]
        return float(r @ r)

    def gradient(self, x):
        r, J, _, _ = self._eval(x)
        return 2.0 * J.T @ r

    def hessian(self, x):
        r, J, R2, _ = self._eval(x)
        return 2.0 * (J.T @ J + np.einsum("i,ijk->jk", r, R2))

    def third_array(self, x):
        r, J, R2, R3 = self._eval(x)
        a = np.einsum("ia,ibc->abc", J, R2)
        return 2.0 * (a + a.transpose(1, 0, 2) + a.transpose(1, 2, 0) + np.einsum("i,iabc->abc", r, R3))


def taylor_model(oracle, x, sigma):
    """Cubic Taylor model of the oracle at ``x`` with quartic weight ``sigma``."""
    f0 = oracle.value(x)
    g = oracle.gradient(x)
    H = oracle.hessian(x)
    T = oracle.third(x)
    if not (np.isfinite(f0) and np.all(np.isfinite(g)) and np.all(np.isfinite(H)) and np.all(np.isfinite(T.data))):
        raise OracleFailure(f"non-finite oracle data at x = {np.asarray(x).tolist()}")
    return CubicModel(f0, g, 0.5 * (H + H.T), T, sigma)
