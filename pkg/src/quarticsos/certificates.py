"""Explicit sum-of-squares certificates for quartically regularized models.

Every certificate here is a symmetric matrix whose positive semidefiniteness,
at a stationary point ``s*``, proves that ``m(s* + v) - m(s*)`` is a sum of
squares in ``v`` (and therefore that ``s*`` is a global minimizer). For the
univariate, T = 0 and special-tensor classes the condition is also necessary.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    NotStationary,
    NonzeroTensor,
    NuOutOfRange,
    TensorShapeMismatch,
    WrongDimension,
)
from .linalg import CERTIFIED, INCONCLUSIVE, VIOLATED, default_psd_tol, psd_check
from .model import CubicModel, SymTensor3, gradient, hessian

__all__ = [
    "TensorSplit",
    "Certificate",
    "GramMatrix",
    "split_tensor",
    "build_B",
    "build_B_scan",
    "B_matrix",
    "certify",
    "build_gram",
    "lift",
    "certify_univariate",
    "certify_qqr",
    "certify_special_t",
    "certify_special_t_wnorm",
    "certify_schnabel",
    "schnabel_necessary",
    "special_t_vector",
    "special_t_tensor",
    "schnabel_B",
    "stationarity_tol",
    "certify_global_sufficient",
    "certify_global_necessary",
    "tensor_norm_upper",
    "psd_check",
]

GENERAL_B = "GeneralB"
UNIVARIATE = "Univariate"
QQR = "QQR"
SPECIAL_T = "SpecialT"
SCHNABEL = "Schnabel"
SCHNABEL_NECESSARY = "SchnabelNecessary"


@dataclass(frozen=True, eq=False)
class TensorSplit:
    """Vectors ``t`` and ``b[(i, j)]`` with

        1/6 T[v]^3 = ||v||^2 (t.v) + sum_{i<j} v_i v_j (b_ij.v)
    """

    t: np.ndarray
    b: dict

    def cubic(self, v):
        v = np.asarray(v, dtype=float)
        out = (v @ v) * (self.t @ v)
        for (i, j), bij in self.b.items():
            out += v[i] * v[j] * (bij @ v)
        return float(out)


@dataclass(frozen=True, eq=False)
class Certificate:
    kind: str
    matrix: np.ndarray
    min_eig: float
    verdict: str
    tolerance: float
    nu: float = float("nan")
    residual: float = 0.0
    notes: tuple = field(default_factory=tuple)

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    def to_dict(self):
        return {
            "kind": self.kind,
            "nu": None if np.isnan(self.nu) else self.nu,
            "min_eig": self.min_eig,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "matrix": np.atleast_2d(self.matrix).tolist(),
            "stationarity_residual": self.residual,
            "notes": list(self.notes),
        }


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Gram matrix over the monomials ``[1 | v | u | z]``.

    ``u_i = v_i^2`` and ``z`` holds ``v_i v_j`` for ``i < j`` in lexicographic
    order.
    """

    dim_n: int
    matrix: np.ndarray
    nu: float

    def quadratic_form(self, v):
        w = lift(v)
        return float(w @ self.matrix @ w)


def lift(v):
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    z = [v[i] * v[j] for i, j in combinations(range(n), 2)]
    return np.concatenate(([1.0], v, v * v, z))


def split_tensor(T):
    """Split the homogeneous cubic ``T[v]^3 / 6`` into linear-times-quadratic pieces.

    Coefficients of ``v_i v_j v_k`` with three distinct indices are shared
    equally between the three pairs ``(i,j)``, ``(i,k)``, ``(j,k)`` so the
    reconstruction is exact for every ``n``.
    """
    if not isinstance(T, SymTensor3):
        T = SymTensor3(T)
    n = T.dim
    d = T.data
    t = np.array([d[i, i, i] / 6.0 for i in range(n)])
    b = {}
    for i, j in combinations(range(n), 2):
        bij = np.zeros(n)
        for k in range(n):
            if k != i and k != j:
                bij[k] = d[i, j, k] / 3.0
        bij[i] = d[i, i, j] / 2.0 - t[j]
        bij[j] = d[i, j, j] / 2.0 - t[i]
        b[(i, j)] = bij
    return TensorSplit(t=t, b=b)


def stationarity_tol(model):
    return 1e-8 * (1.0 + float(np.linalg.norm(model.g)))


def _gate(model, s, gtol):
    res = float(np.linalg.norm(gradient(model, s)))
    if gtol is None:
        gtol = stationarity_tol(model)
    if gtol is not False and res > gtol:
        raise NotStationary(res, gtol)
    return res


def _s_tilde(s, i, j):
    out = np.zeros_like(s)
    out[i] = s[j]
    out[j] = s[i]
    return out


def _check_nu(model, nu):
    if nu is None:
        nu = 0.5 * model.sigma
    if not (0.0 < nu < model.sigma):
        raise NuOutOfRange(f"nu={nu} must lie in (0, sigma={model.sigma})")
    return float(nu)


def B_matrix(model, s_star, nu, split=None):
    """The certificate matrix B(s*) for a given ``nu`` in ``(0, sigma)``."""
    s = np.asarray(s_star, dtype=float)
    n = model.n
    sig = model.sigma
    if split is None:
        split = split_tensor(model.T)
    t = split.t
    ss = s @ s
    B = model.H + model.T.apply1(s) + sig * ss * np.eye(n)
    B -= nu * (ss * np.eye(n) - np.outer(s, s))
    B -= (2.0 / (sig - nu)) * np.outer(t, t)
    B -= 2.0 * (np.outer(s, t) + np.outer(t, s))
    for (i, j), bij in split.b.items():
        st = _s_tilde(s, i, j)
        B -= np.outer(st, bij) + np.outer(bij, st) + np.outer(bij, bij) / nu
    return 0.5 * (B + B.T)


def build_B(model, s_star, nu=None, tol=None, gtol=None):
    """General certificate: ``B(s*) >= 0`` at a stationary point proves global optimality.

    The condition is sufficient only, so a failing matrix gives an
    ``Inconclusive`` verdict rather than ``Violated``.
    """
    nu = _check_nu(model, nu)
    res = _gate(model, s_star, gtol)
    B = B_matrix(model, s_star, nu)
    min_eig, verdict = psd_check(B, tol)
    tol = default_psd_tol(B) if tol is None else tol
    if verdict == VIOLATED:
        verdict = INCONCLUSIVE
    return Certificate(GENERAL_B, B, min_eig, verdict, tol, nu=nu, residual=res)


def build_gram(model, s_star, nu=None):
    """Gram matrix Q with ``lift(v).Q.lift(v) = 2 (m(s*+v) - m(s*))``.

    The constant-linear block carries ``grad m(s*)`` so the identity holds at
    any ``s*``; at a stationary point that block is zero.
    """
    nu = _check_nu(model, nu)
    s = np.asarray(s_star, dtype=float)
    n = model.n
    sig = model.sigma
    split = split_tensor(model.T)
    pairs = list(combinations(range(n), 2))
    N = len(pairs)
    size = 1 + 2 * n + N
    Q = np.zeros((size, size))
    iv = slice(1, 1 + n)
    iu = slice(1 + n, 1 + 2 * n)
    iz = slice(1 + 2 * n, size)
    gr = gradient(model, s)
    Q[0, iv] = gr
    Q[iv, 0] = gr
    Q[iv, iv] = hessian(model, s)
    D = np.outer((sig - nu) * s + split.t, np.ones(n)) + nu * np.diag(s)
    Q[iv, iu] = D
    Q[iu, iv] = D.T
    C = np.zeros((n, N))
    for col, (i, j) in enumerate(pairs):
        C[:, col] = nu * _s_tilde(s, i, j) + split.b[(i, j)]
    Q[iv, iz] = C
    Q[iz, iv] = C.T
    Q[iu, iu] = 0.5 * (sig - nu) * np.ones((n, n)) + 0.5 * nu * np.eye(n)
    Q[iz, iz] = nu * np.eye(N)
    return GramMatrix(dim_n=n, matrix=Q, nu=nu)


def certify_univariate(model, s_star, tol=None, gtol=None):
    """Exact global optimality test for n = 1."""
    if model.n != 1:
        raise WrongDimension("univariate certificate needs n = 1")
    res = _gate(model, s_star, gtol)
    s = float(np.asarray(s_star, dtype=float).reshape(-1)[0])
    H = float(model.H[0, 0])
    T = float(model.T.data[0, 0, 0])
    sig = model.sigma
    val = H + T * s / 3.0 + sig * s * s - T * T / (18.0 * sig)
    if tol is None:
        tol = 1e-8 * max(1.0, abs(H) + abs(T * s) / 3.0 + sig * s * s + T * T / (18.0 * sig))
    verdict = CERTIFIED if val >= -tol else VIOLATED
    return Certificate(UNIVARIATE, np.array([[val]]), val, verdict, tol, residual=res)


def certify_qqr(model, s_star, tol=None, gtol=None):
    """Exact test for T = 0: ``H + sigma ||s*||^2 I >= 0``."""
    if not model.T.is_zero(1e-14):
        raise NonzeroTensor("QQR certificate needs T = 0")
    res = _gate(model, s_star, gtol)
    s = np.asarray(s_star, dtype=float)
    B = model.H + model.sigma * (s @ s) * np.eye(model.n)
    min_eig, verdict = psd_check(B, tol)
    tol = default_psd_tol(B) if tol is None else tol
    return Certificate(QQR, B, min_eig, verdict, tol, residual=res)


def special_t_vector(T):
    """The vector t with ``T[s]^3 = (t.s) ||s||^2`` if T has that form, else None."""
    n = T.dim
    t = 3.0 / (n + 2.0) * np.einsum("ijj->i", T.data)
    if _special_t_holds(T, t):
        return t
    return None


def _special_t_holds(T, t, samples=50, rtol=1e-10, seed=12345):
    rng = np.random.default_rng(seed)
    scale = T.frobenius_norm() + np.linalg.norm(t)
    for _ in range(samples):
        s = rng.normal(size=T.dim)
        s /= np.linalg.norm(s)
        lhs = T.apply3(s)
        rhs = (t @ s) * (s @ s)
        if abs(lhs - rhs) > rtol * max(1.0, scale):
            return False
    return True


def certify_special_t(model, t, s_star, tol=None, gtol=None):
    """Exact test when ``T[s]^3 = (t.s) ||s||^2``."""
    t = np.asarray(t, dtype=float)
    if t.shape != (model.n,) or not _special_t_holds(model.T, t):
        raise TensorShapeMismatch("T[s]^3 does not equal (t.s)||s||^2")
    res = _gate(model, s_star, gtol)
    s = np.asarray(s_star, dtype=float)
    sig = model.sigma
    B = (
        model.H
        + model.T.apply1(s)
        + sig * (s @ s) * np.eye(model.n)
        - (np.outer(s, t) + np.outer(t, s)) / 3.0
        - np.outer(t, t) / (18.0 * sig)
    )
    B = 0.5 * (B + B.T)
    min_eig, verdict = psd_check(B, tol)
    tol = default_psd_tol(B) if tol is None else tol
    return Certificate(SPECIAL_T, B, min_eig, verdict, tol, residual=res)


def special_t_tensor(t):
    """Symmetric tensor with ``T[s]^3 = (t.s) ||s||^2``."""
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    eye = np.eye(n)
    data = (
        np.einsum("i,jk->ijk", t, eye) + np.einsum("j,ik->ijk", t, eye) + np.einsum("k,ij->ijk", t, eye)
    ) / 3.0
    return SymTensor3(data)


def certify_special_t_wnorm(f0, g, H, t, W, sigma, s_star, tol=None, gtol=None):
    """Special-tensor test for the W-weighted model

        f0 + g.s + 1/2 H[s]^2 + 1/6 (t.s)(s'Ws) + sigma/4 (s'Ws)^2,  W > 0.

    With ``W = R'R`` the substitution ``y = R s`` gives a Euclidean special-T
    model in ``y``; the certificate is evaluated there.
    """
    W = np.asarray(W, dtype=float)
    R = np.linalg.cholesky(W).T
    Rinv = np.linalg.inv(R)
    g_y = Rinv.T @ np.asarray(g, dtype=float)
    H_y = Rinv.T @ np.asarray(H, dtype=float) @ Rinv
    t_y = Rinv.T @ np.asarray(t, dtype=float)
    model_y = CubicModel(f0, g_y, 0.5 * (H_y + H_y.T), special_t_tensor(t_y), sigma)
    y_star = R @ np.asarray(s_star, dtype=float)
    return certify_special_t(model_y, t_y, y_star, tol=tol, gtol=gtol), model_y


def _schnabel_gate(sch, s, gtol):
    res = float(np.linalg.norm(sch.gradient(s)))
    if gtol is None:
        gtol = 1e-8 * (1.0 + float(np.linalg.norm(sch.g)))
    if gtol is not False and res > gtol:
        raise NotStationary(res, gtol)
    return res


def schnabel_B(sch, s_star):
    s = np.asarray(s_star, dtype=float)
    B = sch.hessian(s)
    for j in range(sch.k):
        aj = sch.a[j]
        w = aj * (aj @ s) + sch.b[j] / (6.0 * sch.sigmas[j])
        B = B - 2.0 * sch.sigmas[j] * np.outer(w, w)
    return 0.5 * (B + B.T)


def certify_schnabel(sch, s_star, tol=None, gtol=None):
    """Sufficient condition ``B_S(s*) >= 0`` for the seminorm-regularized model."""
    res = _schnabel_gate(sch, s_star, gtol)
    B = schnabel_B(sch, s_star)
    min_eig, verdict = psd_check(B, tol)
    tol = default_psd_tol(B) if tol is None else tol
    return Certificate(SCHNABEL, B, min_eig, verdict, tol, residual=res)


def schnabel_necessary(sch, s_star, tol=None, gtol=None):
    """Directional necessary conditions for a global minimizer of the seminorm model.

    ``B_S`` must be PSD on the orthogonal complement of span{a_j}; when the
    a_j are mutually orthogonal, ``B_S[a_j]^2 >= 0`` is required as well.
    """
    res = _schnabel_gate(sch, s_star, gtol)
    B = schnabel_B(sch, s_star)
    if tol is None:
        tol = default_psd_tol(B)
    notes = []
    values = []
    failed = False
    P = sch.complement_basis()
    if P.shape[1] > 0:
        restricted = P.T @ B @ P
        mr, vr = psd_check(0.5 * (restricted + restricted.T), tol)
        values.append(mr)
        failed |= vr == VIOLATED
    orthogonal = sch.anchors_orthogonal()
    if orthogonal:
        for j in range(sch.k):
            aj = sch.a[j] / np.linalg.norm(sch.a[j])
            q = float(aj @ B @ aj)
            values.append(q)
            failed |= q < -tol
    else:
        notes.append("NonOrthogonalAnchors: anchor-direction check skipped")
    min_val = min(values) if values else 0.0
    if failed:
        verdict = VIOLATED
    elif orthogonal:
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    return Certificate(SCHNABEL_NECESSARY, B, min_val, verdict, tol, residual=res, notes=tuple(notes))


NU_SCAN = (0.5, 0.25, 0.75, 0.1, 0.9, 0.4, 0.6, 0.05, 0.95, 0.02, 0.98)


def build_B_scan(model, s_star, fractions=NU_SCAN, tol=None, gtol=None):
    """General certificate tried over several ``nu = f * sigma``.

    Returns the first Certified result, or the one with the largest smallest
    eigenvalue when none certifies. Any ``nu`` in ``(0, sigma)`` is valid, so
    the scan only widens the set of certifiable points.
    """
    res = _gate(model, s_star, gtol)
    split = split_tensor(model.T)
    best = None
    for f in fractions:
        nu = f * model.sigma
        B = B_matrix(model, s_star, nu, split)
        # cheap screen before the reference eigensolver
        if best is not None and np.linalg.eigvalsh(B)[0] <= best[1]:
            continue
        min_eig, verdict = psd_check(B, tol)
        if best is None or min_eig > best[1]:
            best = (B, min_eig, verdict, nu)
        if verdict == CERTIFIED:
            break
    B, min_eig, verdict, nu = best
    tol = default_psd_tol(B) if tol is None else tol
    if verdict == VIOLATED:
        verdict = INCONCLUSIVE
    return Certificate(GENERAL_B, B, min_eig, verdict, tol, nu=nu, residual=res)


def certify(model, s_star, nu=None, tol=None, gtol=None):
    """Pick the sharpest certificate the model's structure allows.

    n = 1 uses the univariate test, T = 0 the QQR test, a tensor with
    ``T[s]^3 = (t.s)||s||^2`` the special-tensor test, and anything else the
    general matrix, scanning ``nu`` when none is given. If the general matrix
    fails, the norm-based sufficient test is tried, and a failed necessary test
    is reported as Violated.
    """
    if model.n == 1:
        return certify_univariate(model, s_star, tol=tol, gtol=gtol)
    if model.T.is_zero(1e-14):
        return certify_qqr(model, s_star, tol=tol, gtol=gtol)
    t = special_t_vector(model.T)
    if t is not None:
        return certify_special_t(model, t, s_star, tol=tol, gtol=gtol)
    if nu is None:
        c = build_B_scan(model, s_star, tol=tol, gtol=gtol)
    else:
        c = build_B(model, s_star, nu=nu, tol=tol, gtol=gtol)
    if c.verdict == CERTIFIED:
        return c
    alt = certify_global_sufficient(model, s_star, tol=tol, gtol=gtol)
    if alt.verdict == CERTIFIED:
        return alt
    nec = certify_global_necessary(model, s_star, tol=tol, gtol=gtol)
    if nec.verdict == VIOLATED:
        return nec
    return c


GLOBAL_SUFFICIENT = "GlobalSufficient"
GLOBAL_NECESSARY = "GlobalNecessary"


def tensor_norm_upper(T):
    """Upper bound on ``max_{||s||=1} |T[s]^3|``: the spectral norm of the n x n^2 unfolding."""
    n = T.dim
    return float(min(np.linalg.norm(T.data.reshape(n, n * n), 2), T.frobenius_norm()))


def certify_global_sufficient(model, s_star, tensor_norm=None, tol=None, gtol=None):
    """Sufficient test ``H + 2/3 T[s] + (sigma r^2 - tau r/3 - tau^2/(18 sigma)) I >= 0``.

    ``r = ||s*||`` and ``tau`` is any upper bound on the tensor norm. A failure
    is Inconclusive.
    """
    res = _gate(model, s_star, gtol)
    tau = tensor_norm_upper(model.T) if tensor_norm is None else float(tensor_norm)
    s = np.asarray(s_star, dtype=float)
    r = float(np.linalg.norm(s))
    sig = model.sigma
    B = model.H + (2.0 / 3.0) * model.T.apply1(s) + (sig * r * r - tau * r / 3.0 - tau * tau / (18.0 * sig)) * np.eye(model.n)
    B = 0.5 * (B + B.T)
    min_eig, verdict = psd_check(B, tol)
    tol = default_psd_tol(B) if tol is None else tol
    if verdict == VIOLATED:
        verdict = INCONCLUSIVE
    return Certificate(GLOBAL_SUFFICIENT, B, min_eig, verdict, tol, residual=res)


def certify_global_necessary(model, s_star, tensor_norm=None, tol=None, gtol=None):
    """Necessary test ``H + 2/3 T[s] + (sigma r^2 + tau r/3) I >= 0`` at a global minimizer.

    A failure proves ``s*`` is not a global minimizer (Violated); success is
    Certified only in the sense that the necessary condition holds.
    """
    res = _gate(model, s_star, gtol)
    tau = tensor_norm_upper(model.T) if tensor_norm is None else float(tensor_norm)
    s = np.asarray(s_star, dtype=float)
    r = float(np.linalg.norm(s))
    B = model.H + (2.0 / 3.0) * model.T.apply1(s) + (model.sigma * r * r + tau * r / 3.0) * np.eye(model.n)
    B = 0.5 * (B + B.T)
    min_eig, verdict = psd_check(B, tol)
    tol = default_psd_tol(B) if tol is None else tol
    return Certificate(GLOBAL_NECESSARY, B, min_eig, verdict, tol, residual=res)
