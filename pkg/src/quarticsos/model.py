"""Quartically regularized cubic models and their derivatives.

A model is

    m(s) = f0 + g.s + 1/2 H[s]^2 + 1/6 T[s]^3 + sigma/4 ||s||^4

with ``H`` symmetric and ``T`` a symmetric third-order tensor.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations

import numpy as np

from .errors import DimensionMismatch, NonFinite
from .linalg import jacobi_eigh

__all__ = [
    "SymTensor3",
    "CubicModel",
    "NormBundle",
    "ShiftedExpansion",
    "evaluate",
    "gradient",
    "hessian",
    "shifted_expansion",
    "norm_bundle",
    "quick_norms",
    "tensor_spectral_lower_bound",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class SymTensor3:
    """Dense symmetric order-3 tensor.

    Built from the unique entries ``T[i, j, k]`` with ``i <= j <= k``; the full
    array is materialised once so every permutation of an index triple reads
    the same value.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        data = np.asarray(data, dtype=float)
        if data.ndim != 3 or not (data.shape[0] == data.shape[1] == data.shape[2]):
            raise DimensionMismatch(f"expected an (n, n, n) array, got {data.shape}")
        perms = [np.transpose(data, p) for p in permutations(range(3))]
        if all(np.array_equal(data, q) for q in perms[1:]):
            self._data = _frozen(data)
            return
        sym = sum(perms) / 6.0
        scale = max(1.0, float(np.max(np.abs(data), initial=0.0)))
        if np.max(np.abs(sym - data), initial=0.0) > 1e-12 * scale:
            raise ValueError("tensor is not symmetric")
        # every permutation reads the sorted-index entry, so symmetry is exact
        idx = np.sort(np.indices(sym.shape).reshape(3, -1), axis=0)
        self._data = _frozen(sym[tuple(idx)].reshape(sym.shape))

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros((n, n, n)))

    @classmethod
    def from_unique(cls, n, entries):
        """Build from a mapping ``{(i, j, k): value}`` with ``i <= j <= k``."""
        data = np.zeros((n, n, n))
        for (i, j, k), val in entries.items():
            if not (0 <= i <= j <= k < n):
                raise ValueError(f"index triple {(i, j, k)} must satisfy 0 <= i <= j <= k < {n}")
            for p in set(permutations((i, j, k))):
                data[p] = val
        return cls(data)

    @classmethod
    def symmetrize(cls, data):
        data = np.asarray(data, dtype=float)
        return cls(sum(np.transpose(data, p) for p in permutations(range(3))) / 6.0)

    @classmethod
    def rank_one(cls, alpha, u):
        u = np.asarray(u, dtype=float)
        return cls(alpha * np.einsum("i,j,k->ijk", u, u, u))

    @property
    def dim(self):
        return self._data.shape[0]

    @property
    def data(self):
        return self._data

    def __getitem__(self, idx):
        return self._data[idx]

    def __eq__(self, other):
        return isinstance(other, SymTensor3) and np.array_equal(self._data, other._data)

    def __repr__(self):
        return f"SymTensor3(dim={self.dim}, frob={self.frobenius_norm():.4g})"

    def unique_entries(self, include_zeros=False):
        out = {}
        for i, j, k in combinations_with_replacement(range(self.dim), 3):
            v = float(self._data[i, j, k])
            if include_zeros or v != 0.0:
                out[(i, j, k)] = v
        return out

    def apply1(self, s):
        """Matrix ``T[s]`` with entries ``sum_k T_ijk s_k``."""
        return self._data @ np.asarray(s, dtype=float)

    def apply2(self, s):
        """Vector ``T[s]^2``."""
        s = np.asarray(s, dtype=float)
        return (self._data @ s) @ s

    def apply3(self, s):
        s = np.asarray(s, dtype=float)
        return float(self.apply2(s) @ s)

    def frobenius_norm(self):
        return float(np.sqrt(np.sum(self._data**2)))

    def is_zero(self, atol=1e-14):
        return bool(np.max(np.abs(self._data), initial=0.0) <= atol)

    def scaled(self, c):
        return SymTensor3(c * self._data)


@dataclass(frozen=True, eq=False)
class CubicModel:
    f0: float
    g: np.ndarray
    H: np.ndarray
    T: SymTensor3
    sigma: float

    def __post_init__(self):
        g = _frozen(np.atleast_1d(self.g))
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        n = g.shape[0]
        if g.ndim != 1:
            raise DimensionMismatch("g must be a vector")
        if H.shape != (n, n):
            raise DimensionMismatch(f"H has shape {H.shape}, expected {(n, n)}")
        if not np.array_equal(H, H.T):
            scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
            if np.max(np.abs(H - H.T)) > 1e-12 * scale:
                raise ValueError("H must be symmetric")
            H = 0.5 * (H + H.T)
        T = self.T
        if not isinstance(T, SymTensor3):
            T = SymTensor3(T)
        if T.dim != n:
            raise DimensionMismatch(f"T has dimension {T.dim}, expected {n}")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be a positive finite number")
        object.__setattr__(self, "f0", float(self.f0))
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", _frozen(H))
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n(self):
        return self.g.shape[0]

    def with_sigma(self, sigma):
        return CubicModel(self.f0, self.g, self.H, self.T, sigma)

    def __eq__(self, other):
        return (
            isinstance(other, CubicModel)
            and self.f0 == other.f0
            and self.sigma == other.sigma
            and np.array_equal(self.g, other.g)
            and np.array_equal(self.H, other.H)
            and self.T == other.T
        )

    def value(self, s):
        return evaluate(self, s)

    def gradient(self, s):
        return gradient(self, s)

    def hessian(self, s):
        return hessian(self, s)

    def taylor_value(self, s):
        """The cubic Taylor part, i.e. the model without the quartic term."""
        s = _vec(self, s)
        return self.f0 + self.g @ s + 0.5 * s @ self.H @ s + self.T.apply3(s) / 6.0


def _vec(model, s):
    s = np.asarray(s, dtype=float)
    if s.shape != (model.n,):
        raise DimensionMismatch(f"vector has shape {s.shape}, model dimension is {model.n}")
    return s


def evaluate(model, s):
    s = _vec(model, s)
    ss = s @ s
    val = model.f0 + model.g @ s + 0.5 * s @ model.H @ s + model.T.apply3(s) / 6.0 + 0.25 * model.sigma * ss * ss
    if not np.isfinite(val):
        raise NonFinite("model value is not finite")
    return float(val)


def gradient(model, s):
    s = _vec(model, s)
    return model.g + model.H @ s + 0.5 * model.T.apply2(s) + model.sigma * (s @ s) * s


def hessian(model, s):
    s = _vec(model, s)
    n = model.n
    return model.H + model.T.apply1(s) + model.sigma * (2.0 * np.outer(s, s) + (s @ s) * np.eye(n))


@dataclass(frozen=True, eq=False)
class ShiftedExpansion:
    """Exact expansion of ``q(v) = m(s* + v) - m(s*)`` about ``s*``.

    ``G`` is ``H + T[s*] + sigma ||s*||^2 I``; ``hess`` is the full Hessian at
    ``s*``.
    """

    grad: np.ndarray
    G: np.ndarray
    hess: np.ndarray
    T: SymTensor3
    sigma: float
    s_star: np.ndarray

    def value(self, v):
        v = np.asarray(v, dtype=float)
        s = self.s_star
        d = (s + v) @ (s + v) - s @ s
        return float(self.grad @ v + 0.5 * v @ self.G @ v + self.T.apply3(v) / 6.0 + 0.25 * self.sigma * d * d)

    def value_expanded(self, v):
        """Same polynomial written with the full Hessian and a cross term."""
        v = np.asarray(v, dtype=float)
        vv = v @ v
        return float(
            self.grad @ v
            + 0.5 * v @ self.hess @ v
            + self.T.apply3(v) / 6.0
            + 0.25 * self.sigma * vv * vv
            + self.sigma * (self.s_star @ v) * vv
        )

    def as_model(self):
        """Model whose value plus ``sigma * (s*.v) ||v||^2`` equals ``q(v)``."""
        return CubicModel(0.0, self.grad, self.hess, self.T, self.sigma)


def shifted_expansion(model, s_star):
    s = _vec(model, s_star)
    G = model.H + model.T.apply1(s) + model.sigma * (s @ s) * np.eye(model.n)
    return ShiftedExpansion(
        grad=_frozen(gradient(model, s)),
        G=_frozen(G),
        hess=_frozen(hessian(model, s)),
        T=model.T,
        sigma=model.sigma,
        s_star=_frozen(s),
    )


@dataclass(frozen=True)
class NormBundle:
    h_norm: float
    lambda_star: float
    t_spec_lb: float
    t_frob: float
    g_norm: float

    @property
    def t_upper(self):
        """Upper bound on the spectral tensor norm used by every threshold."""
        return self.t_frob


def tensor_spectral_lower_bound(T, restarts=8, seed=0, max_iter=500, tol=1e-14):
    """Lower bound on ``max_{||s||=1} |T[s]^3|`` by shifted power iteration.

    The returned number is ``|T[s]^3|`` at an actual unit vector, so it never
    exceeds the true norm.
    """
    n = T.dim
    if T.is_zero(0.0):
        return 0.0
    rng = np.random.default_rng(seed)
    shift = T.frobenius_norm()
    starts = list(np.eye(n)) + [rng.normal(size=n) for _ in range(restarts)]
    best = 0.0
    for x in starts:
        x = x / np.linalg.norm(x)
        for sign in (1.0, -1.0):
            s = sign * x
            val = T.apply3(s)
            for _ in range(max_iter):
                y = T.apply2(s) + shift * s
                ny = np.linalg.norm(y)
                if ny == 0.0:
                    break
                s_new = y / ny
                new_val = T.apply3(s_new)
                s = s_new
                if abs(new_val - val) <= tol * max(1.0, abs(new_val)):
                    val = new_val
                    break
                val = new_val
            best = max(best, abs(val))
    return float(best)


def norm_bundle(model, restarts=8, seed=0):
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    w, _ = jacobi_eigh(model.H)
    h_norm = float(np.max(np.abs(w))) if w.size else 0.0
    lam = max(-float(w[0]), 0.0)
    t_frob = model.T.frobenius_norm()
    t_lb = min(tensor_spectral_lower_bound(model.T, restarts=restarts, seed=seed), t_frob)
    return NormBundle(
        h_norm=h_norm,
        lambda_star=lam,
        t_spec_lb=t_lb,
        t_frob=t_frob,
        g_norm=float(np.linalg.norm(model.g)),
    )


def quick_norms(model):
    """Norm bundle without the power iteration; ``t_spec_lb`` is the trivial bound 0."""
    w = np.linalg.eigvalsh(model.H)
    return NormBundle(
        h_norm=float(np.max(np.abs(w))),
        lambda_star=max(-float(w[0]), 0.0),
        t_spec_lb=0.0,
        t_frob=model.T.frobenius_norm(),
        g_norm=float(np.linalg.norm(model.g)),
    )
