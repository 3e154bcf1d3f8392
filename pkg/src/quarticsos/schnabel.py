"""Tensor model with a sum of rank-one quartic seminorms.

    m(s) = f0 + g.s + 1/2 H[s]^2 + 1/6 sum_j (a_j.s)^2 (b_j.s) + 1/4 sum_j sigma_j (a_j.s)^4
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

__all__ = ["SchnabelModel"]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SchnabelModel:
    f0: float
    g: np.ndarray
    H: np.ndarray
    a: np.ndarray  # (k, n), row j is a_j
    b: np.ndarray  # (k, n)
    sigmas: np.ndarray  # (k,)

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.g, dtype=float))
        n = g.shape[0]
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        sig = np.atleast_1d(np.asarray(self.sigmas, dtype=float))
        k = a.shape[0]
        if H.shape != (n, n) or a.shape != (k, n) or b.shape != (k, n) or sig.shape != (k,):
            raise DimensionMismatch("inconsistent Schnabel model dimensions")
        if np.any(sig <= 0):
            raise ValueError("all sigma_j must be positive")
        if np.max(np.abs(H - H.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(H), initial=0.0)):
            raise ValueError("H must be symmetric")
        object.__setattr__(self, "f0", float(self.f0))
        object.__setattr__(self, "g", _frozen(g))
        object.__setattr__(self, "H", _frozen(0.5 * (H + H.T)))
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "sigmas", _frozen(sig))

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def k(self):
        return self.a.shape[0]

    def _check(self, s):
        s = np.asarray(s, dtype=float)
        if s.shape != (self.n,):
            raise DimensionMismatch(f"vector has shape {s.shape}, model dimension is {self.n}")
        return s

    def value(self, s):
        s = self._check(s)
        al = self.a @ s
        be = self.b @ s
        return float(
            self.f0
            + self.g @ s
            + 0.5 * s @ self.H @ s
            + np.sum(al**2 * be) / 6.0
            + 0.25 * np.sum(self.sigmas * al**4)
        )

    def gradient(self, s):
        s = self._check(s)
        al = self.a @ s
        be = self.b @ s
        coef_a = al * be / 3.0 + self.sigmas * al**3
        coef_b = al**2 / 6.0
        return self.g + self.H @ s + self.a.T @ coef_a + self.b.T @ coef_b

    def hessian(self, s):
        s = self._check(s)
        al = self.a @ s
        be = self.b @ s
        out = np.array(self.H, dtype=float)
        for j in range(self.k):
            aj, bj = self.a[j], self.b[j]
            out += (be[j] / 3.0 + 3.0 * self.sigmas[j] * al[j] ** 2) * np.outer(aj, aj)
            out += (al[j] / 3.0) * (np.outer(aj, bj) + np.outer(bj, aj))
        return out

    def cubic_tensor(self):
        """Dense symmetric tensor T with T[s]^3 = sum_j (a_j.s)^2 (b_j.s)."""
        from .model import SymTensor3

        raw = np.einsum("ji,jk,jl->ikl", self.a, self.a, self.b)
        return SymTensor3.symmetrize(raw)

    def complement_basis(self, rtol=1e-12):
        """Orthonormal basis (columns) of the orthogonal complement of span{a_j}."""
        u, sv, _ = np.linalg.svd(self.a.T, full_matrices=True)
        rank = int(np.sum(sv > rtol * max(1.0, sv[0] if sv.size else 0.0)))
        return u[:, rank:]

    def anchors_orthogonal(self, rtol=1e-10):
        gram = self.a @ self.a.T
        off = gram - np.diag(np.diag(gram))
        return bool(np.max(np.abs(off), initial=0.0) <= rtol * max(1.0, np.max(np.abs(gram), initial=0.0)))
