"""Test objectives and model families.

Quartic-weight conventions differ between sources. ``CubicModel`` always uses
``sigma/4 ||s||^4``; constructors whose source form is ``sigma ||s||^4``
convert by storing ``4 * sigma``.
"""

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement

import numpy as np

from .errors import UnknownProblem
from .model import CubicModel, SymTensor3
from .oracles import LeastSquaresOracle
from .schnabel import SchnabelModel

__all__ = [
    "ProblemSpec",
    "HAT_H",
    "make_ahmadi",
    "make_euclidean_example",
    "make_euclidean_perturbed",
    "make_euclidean_cubic",
    "make_regularized_cubic_ball",
    "random_cubic_ball",
    "make_sensor",
    "random_sensor",
    "make_named",
    "PROBLEM_NAMES",
]

# Hessian of 2||s||^2 + 8(s1 s2 + s1 s3 + s2 s3); eigenvalues -4, -4, 20.
HAT_H = np.array([[4.0, 8.0, 8.0], [8.0, 4.0, 8.0], [8.0, 8.0, 4.0]])


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    dim: int
    oracle: object
    default_x0: np.ndarray
    known_minimizer: np.ndarray = None
    known_min_value: float = None
    extra: dict = None


def make_ahmadi(sigma):
    """``2||s||^2 + 8(s1 s2 + s1 s3 + s2 s3) + sigma/4 sum s_i^4`` as a seminorm model."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return SchnabelModel(0.0, np.zeros(3), HAT_H, np.eye(3), np.zeros((3, 3)), np.full(3, float(sigma)))


def make_euclidean_example(sigma):
    """``2||s||^2 + 8(s1 s2 + s1 s3 + s2 s3) + sigma ||s||^4``.

    Global minimum ``-1/sigma`` on the circle ``s1+s2+s3 = 0``,
    ``||s|| = sigma^(-1/2)``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return CubicModel(0.0, np.zeros(3), HAT_H, SymTensor3.zeros(3), 4.0 * sigma)


def make_euclidean_perturbed(sigma, variant, seed=0):
    """Perturbed Euclidean examples that break the circle of minimizers.

    ``variant=1``: ``sigma/4 ||s||^4 + 2||s||^2 + 8[(1+1e-5) s1 s2 + s1 s3 + s2 s3]``.
    ``variant=2``: ``sigma ||s||^4 + 2||s||^2 + 8 sum (1 + 1e-6 xi_ij) s_i s_j``
    with standard normal ``xi_ij`` drawn from ``seed``.
    """
    H = HAT_H.copy()
    if variant == 1:
        H[0, 1] = H[1, 0] = 8.0 * (1.0 + 1e-5)
        sig_c = float(sigma)
    elif variant == 2:
        xi = np.random.default_rng(seed).normal(size=3)
        for (i, j), x in zip(((0, 1), (0, 2), (1, 2)), xi):
            H[i, j] = H[j, i] = 8.0 * (1.0 + 1e-6 * x)
        sig_c = 4.0 * sigma
    else:
        raise ValueError("variant must be 1 or 2")
    return CubicModel(0.0, np.zeros(3), H, SymTensor3.zeros(3), sig_c)


def make_euclidean_cubic(sigma, coef=0.1):
    """Euclidean example plus ``coef * (s1^3 + s2^3 + s3^3)``."""
    T = SymTensor3.from_unique(3, {(i, i, i): 6.0 * coef for i in range(3)})
    return CubicModel(0.0, np.zeros(3), HAT_H, T, 4.0 * sigma)


def _tensor_from_monomials(n, coeffs):
    """Symmetric T with ``T[s]^3 / 6 = sum coeffs[(i,j,k)] s_i s_j s_k`` (i <= j <= k)."""
    entries = {}
    for (i, j, k), c in coeffs.items():
        mult = len({(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)})
        entries[(i, j, k)] = 6.0 * c / mult
    return SymTensor3.from_unique(n, entries)


def make_regularized_cubic_ball(coeffs, sigma, g=None):
    """``g.s + g3(s) + sigma (||s||^4 - 1)``.

    ``coeffs`` maps sorted triples ``(i, j, k)`` to the coefficient of
    ``s_i s_j s_k`` in ``g3``.
    """
    if not coeffs:
        raise ValueError("coeffs must name at least one monomial or give the dimension via g")
    n = 1 + max(max(t) for t in coeffs)
    if g is not None:
        n = max(n, len(g))
    T = _tensor_from_monomials(n, coeffs)
    gv = np.zeros(n) if g is None else np.asarray(g, dtype=float)
    return CubicModel(-float(sigma), gv, np.zeros((n, n)), T, 4.0 * sigma)


def random_cubic_ball(n, sigma, rng, homogeneous=True, low=-100.0, high=0.0):
    """Random instance with every cubic (and linear) coefficient uniform in ``[low, high]``."""
    coeffs = {t: float(rng.uniform(low, high)) for t in combinations_with_replacement(range(n), 3)}
    g = None if homogeneous else rng.uniform(low, high, size=n)
    if g is None:
        g = np.zeros(n)
    return make_regularized_cubic_ball(coeffs, sigma, g)


def _pair_residual(u, d2):
    """Residual ``||u||^2 - d2`` and its derivatives in ``u``."""
    m = u.shape[0]
    eye = np.eye(m)
    r = u @ u - d2
    J = 2.0 * u
    R2 = 2.0 * eye
    return r, J, R2


def make_sensor(anchors, sensors_true, noise_level=0.0, seed=0, x0=None):
    """Sensor localization in R^3.

    ``f(x) = sum_{i<j} (||x_i - x_j||^2 - d_ij^2)^2 + sum_{i,k} (||x_i - a_k||^2 - d_ik^2)^2``
    over unordered sensor pairs and all sensor-anchor pairs. Distances are the
    true ones plus Gaussian noise of standard deviation ``noise_level``. The
    default start puts sensor ``i`` on anchor ``i mod |A|``.
    """
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    X = np.atleast_2d(np.asarray(sensors_true, dtype=float))
    if A.shape[1] != 3 or X.shape[1] != 3:
        raise ValueError("positions must lie in R^3")
    ns, na = X.shape[0], A.shape[0]
    n = 3 * ns
    rng = np.random.default_rng(seed)
    pairs_ss = list(combinations(range(ns), 2))
    pairs_sa = [(i, k) for i in range(ns) for k in range(na)]
    d_ss = np.array([np.linalg.norm(X[i] - X[j]) for i, j in pairs_ss]) + noise_level * rng.normal(size=len(pairs_ss))
    d_sa = np.array([np.linalg.norm(X[i] - A[k]) for i, k in pairs_sa]) + noise_level * rng.normal(size=len(pairs_sa))
    m = len(pairs_ss) + len(pairs_sa)

    def residuals(x):
        P = x.reshape(ns, 3)
        r = np.zeros(m)
        J = np.zeros((m, n))
        R2 = np.zeros((m, n, n))
        R3 = np.zeros((m, n, n, n))
        row = 0
        for (i, j), d in zip(pairs_ss, d_ss):
            ri, Ji, Hi = _pair_residual(P[i] - P[j], d * d)
            si, sj = slice(3 * i, 3 * i + 3), slice(3 * j, 3 * j + 3)
            r[row] = ri
            J[row, si], J[row, sj] = Ji, -Ji
            R2[row, si, si] = R2[row, sj, sj] = Hi
            R2[row, si, sj] = R2[row, sj, si] = -Hi
            row += 1
        for (i, k), d in zip(pairs_sa, d_sa):
            ri, Ji, Hi = _pair_residual(P[i] - A[k], d * d)
            si = slice(3 * i, 3 * i + 3)
            r[row] = ri
            J[row, si] = Ji
            R2[row, si, si] = Hi
            row += 1
        return r, J, R2, R3

    oracle = LeastSquaresOracle(n, residuals)
    if x0 is None:
        x0 = np.concatenate([A[i % na] for i in range(ns)])
    known = X.reshape(-1) if noise_level == 0 else None
    return ProblemSpec(
        name="sensor",
        dim=n,
        oracle=oracle,
        default_x0=np.asarray(x0, dtype=float),
        known_minimizer=known,
        known_min_value=0.0 if noise_level == 0 else None,
        extra={"anchors": A, "sensors_true": X, "d_ss": d_ss, "d_sa": d_sa, "noise_level": noise_level},
    )


def random_sensor(n_sensors=2, n_anchors=2, noise_level=1e-4, seed=0):
    """Sensor instance with anchors and true positions uniform in ``[-1, 1]^3``."""
    rng = np.random.default_rng(seed)
    anchors = rng.uniform(-1.0, 1.0, size=(n_anchors, 3))
    sensors = rng.uniform(-1.0, 1.0, size=(n_sensors, 3))
    return make_sensor(anchors, sensors, noise_level=noise_level, seed=seed)


def _rosenbrock(x):
    r = np.array([x[0] - 1.0, 10.0 * (x[1] - x[0] ** 2)])
    J = np.array([[1.0, 0.0], [-20.0 * x[0], 10.0]])
    R2 = np.zeros((2, 2, 2))
    R2[1, 0, 0] = -20.0
    return r, J, R2, np.zeros((2, 2, 2, 2))


_BEALE_Y = np.array([1.5, 2.25, 2.625])


def _beale(x):
    x1, x2 = x
    r = np.zeros(3)
    J = np.zeros((3, 2))
    R2 = np.zeros((3, 2, 2))
    R3 = np.zeros((3, 2, 2, 2))
    for idx in range(3):
        i = idx + 1
        r[idx] = _BEALE_Y[idx] - x1 * (1.0 - x2**i)
        J[idx] = [-(1.0 - x2**i), x1 * i * x2 ** (i - 1)]
        d12 = i * x2 ** (i - 1)
        d22 = x1 * i * (i - 1) * x2 ** (i - 2) if i >= 2 else 0.0
        R2[idx] = [[0.0, d12], [d12, d22]]
        d122 = i * (i - 1) * x2 ** (i - 2) if i >= 2 else 0.0
        d222 = x1 * i * (i - 1) * (i - 2) * x2 ** (i - 3) if i >= 3 else 0.0
        R3[idx, 0, 1, 1] = R3[idx, 1, 0, 1] = R3[idx, 1, 1, 0] = d122
        R3[idx, 1, 1, 1] = d222
    return r, J, R2, R3


def _chebyshev(n):
    def residuals(x):
        r = np.zeros(n)
        J = np.zeros((n, n))
        R2 = np.zeros((n, n, n))
        r[0] = 0.5 * (x[0] - 1.0)
        J[0, 0] = 0.5
        for i in range(n - 1):
            r[i + 1] = x[i + 1] - 2.0 * x[i] ** 2 + 1.0
            J[i + 1, i + 1] = 1.0
            J[i + 1, i] = -4.0 * x[i]
            R2[i + 1, i, i] = -4.0
        return r, J, R2, np.zeros((n, n, n, n))

    return residuals


def _atan2_derivs(x, y):
    """Derivatives of ``atan2(y, x)`` up to order three as nested arrays."""
    z = complex(x, y)
    d1 = np.zeros(2)
    d2 = np.zeros((2, 2))
    d3 = np.zeros((2, 2, 2))
    # atan2 = Im log z; d/dx -> d/dz, d/dy -> i d/dz
    for a in range(2):
        d1[a] = ((1j) ** a / z).imag
        for b in range(2):
            k = a + b
            d2[a, b] = ((1j) ** k * (-1.0) / z**2).imag
            for c in range(2):
                k3 = a + b + c
                d3[a, b, c] = ((1j) ** k3 * 2.0 / z**3).imag
    return d1, d2, d3


def _helical_valley(x):
    x1, x2, x3 = x
    tp = 2.0 * np.pi
    if x1 > 0:
        theta = np.arctan(x2 / x1) / tp
    elif x1 < 0:
        theta = np.arctan(x2 / x1) / tp + 0.5
    else:
        theta = 0.25 * np.sign(x2)
    t1, t2, t3 = (d / tp for d in _atan2_derivs(x1, x2))
    rho = np.hypot(x1, x2)
    u = np.array([x1, x2])
    eye = np.eye(2)
    rho1 = u / rho
    rho2 = (eye * rho**2 - np.outer(u, u)) / rho**3
    rho3 = (
        -(np.einsum("ab,c->abc", eye, u) + np.einsum("ac,b->abc", eye, u) + np.einsum("bc,a->abc", eye, u)) / rho**3
        + 3.0 * np.einsum("a,b,c->abc", u, u, u) / rho**5
    )
    r = np.array([10.0 * (x3 - 10.0 * theta), 10.0 * (rho - 1.0), x3])
    J = np.zeros((3, 3))
    R2 = np.zeros((3, 3, 3))
    R3 = np.zeros((3, 3, 3, 3))
    J[0, :2] = -100.0 * t1
    J[0, 2] = 10.0
    J[1, :2] = 10.0 * rho1
    J[2, 2] = 1.0
    R2[0, :2, :2] = -100.0 * t2
    R2[1, :2, :2] = 10.0 * rho2
    R3[0, :2, :2, :2] = -100.0 * t3
    R3[1, :2, :2, :2] = 10.0 * rho3
    return r, J, R2, R3


def _powell_badly_scaled(x):
    x1, x2 = x
    e1, e2 = np.exp(-x1), np.exp(-x2)
    r = np.array([1e4 * x1 * x2 - 1.0, e1 + e2 - 1.0001])
    J = np.array([[1e4 * x2, 1e4 * x1], [-e1, -e2]])
    R2 = np.zeros((2, 2, 2))
    R2[0] = [[0.0, 1e4], [1e4, 0.0]]
    R2[1] = [[e1, 0.0], [0.0, e2]]
    R3 = np.zeros((2, 2, 2, 2))
    R3[1, 0, 0, 0] = -e1
    R3[1, 1, 1, 1] = -e2
    return r, J, R2, R3


PROBLEM_NAMES = ("rosenbrock", "beale", "nesterov_chebyshev", "helical_valley", "powell_badly_scaled")


def make_named(name, n=2):
    """Named test problem; ``n`` is used only by ``nesterov_chebyshev``."""
    if name == "rosenbrock":
        return ProblemSpec(name, 2, LeastSquaresOracle(2, _rosenbrock), np.array([-1.2, 1.0]), np.ones(2), 0.0)
    if name == "beale":
        return ProblemSpec(name, 2, LeastSquaresOracle(2, _beale), np.array([1.0, 1.0]), np.array([3.0, 0.5]), 0.0)
    if name == "nesterov_chebyshev":
        if n < 2:
            raise ValueError("nesterov_chebyshev needs n >= 2")
        x0 = np.ones(n)
        x0[0] = -1.0
        return ProblemSpec(name, n, LeastSquaresOracle(n, _chebyshev(n)), x0, np.ones(n), 0.0)
    if name == "helical_valley":
        return ProblemSpec(
            name, 3, LeastSquaresOracle(3, _helical_valley), np.array([-1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), 0.0
        )
    if name == "powell_badly_scaled":
        return ProblemSpec(
            name,
            2,
            LeastSquaresOracle(2, _powell_badly_scaled),
            np.array([0.0, 1.0]),
            np.array([1.098159329699759e-05, 9.106146739866486]),
            0.0,
        )
    raise UnknownProblem(name)
