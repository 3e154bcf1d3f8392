"""Independent reference computations used as test oracles.

Nothing here calls the package's solvers or certificate code: values are
computed by explicit monomial sums, finite differences, dense grids and
scipy's quasi-Newton minimizer.
"""

from itertools import product

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from quarticsos.model import CubicModel, SymTensor3


def fd_derivative(fun, x, h=1e-5):
    """Central-difference derivative of an array-valued ``fun``; last axis is the direction."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def random_sym_array(rng, n, scale=1.0):
    """Symmetric (n, n, n) array filled entry by entry from sorted index triples."""
    base = rng.normal(scale=scale, size=(n, n, n))
    out = np.zeros((n, n, n))
    for i, j, k in product(range(n), repeat=3):
        out[i, j, k] = base[tuple(sorted((i, j, k)))]
    return out


def random_model(rng, n, sigma=None, g_scale=1.0, h_scale=1.0, t_scale=1.0):
    H = rng.normal(scale=h_scale, size=(n, n))
    H = 0.5 * (H + H.T)
    T = random_sym_array(rng, n, t_scale)
    if sigma is None:
        sigma = float(rng.uniform(0.5, 3.0))
    return CubicModel(float(rng.normal()), rng.normal(scale=g_scale, size=n), H, SymTensor3(T), sigma)


def monomial_value(model, s):
    """Model value by explicit index sums."""
    s = np.asarray(s, dtype=float)
    n = s.size
    T = model.T.data
    cubic = sum(T[i, j, k] * s[i] * s[j] * s[k] for i, j, k in product(range(n), repeat=3))
    quad = sum(model.H[i, j] * s[i] * s[j] for i, j in product(range(n), repeat=2))
    r2 = sum(x * x for x in s)
    return model.f0 + float(np.dot(model.g, s)) + 0.5 * quad + cubic / 6.0 + 0.25 * model.sigma * r2 * r2


def coercivity_radius(model):
    """Radius beyond which ``m(s) > m(0)``, from norm bounds on each term."""
    g = float(np.linalg.norm(model.g))
    h = float(np.linalg.norm(model.H, 2))
    t = model.T.frobenius_norm()
    roots = np.roots([model.sigma / 4.0, -t / 6.0, -h / 2.0, -g])
    real = [r.real for r in roots if abs(r.imag) < 1e-9 and r.real > 0]
    return max(real) if real else 1.0


def global_min(model, rng, nstarts=60):
    """Multistart BFGS inside the coercivity ball; returns ``(x, value)``."""
    n = model.n
    R = coercivity_radius(model)
    f = model.value
    jac = model.gradient
    best = (np.zeros(n), f(np.zeros(n)))
    starts = [np.zeros(n)] + [rng.uniform(-R, R, size=n) for _ in range(nstarts)]
    for x0 in starts:
        res = minimize(f, x0, jac=jac, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        if res.fun < best[1]:
            best = (res.x, float(res.fun))
    return best


def univariate_min(model, points=200001):
    """Dense grid on the coercivity interval, refined by bounded scalar search."""
    R = coercivity_radius(model) * 1.01
    xs = np.linspace(-R, R, points)
    ss = xs * xs
    vals = (
        model.f0 + model.g[0] * xs + 0.5 * model.H[0, 0] * ss + model.T.data[0, 0, 0] * ss * xs / 6.0
        + 0.25 * model.sigma * ss * ss
    )
    i = int(np.argmin(vals))
    h = xs[1] - xs[0]
    res = minimize_scalar(lambda x: model.value(np.array([x])), bounds=(xs[i] - h, xs[i] + h), method="bounded",
                          options={"xatol": 1e-13})
    return float(res.x), float(res.fun)


def unit_vectors(rng, n, count):
    v = rng.normal(size=(count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
