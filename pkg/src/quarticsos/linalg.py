"""Dense symmetric eigensolver and PSD test.

The certificate matrices here are small (n <= ~50), so a cyclic Jacobi
sweep is accurate, deterministic and fast enough.
"""

import numpy as np

from .errors import NonSymmetric

__all__ = ["jacobi_eigh", "psd_check", "default_psd_tol", "CERTIFIED", "VIOLATED", "INCONCLUSIVE"]

CERTIFIED = "Certified"
VIOLATED = "Violated"
INCONCLUSIVE = "Inconclusive"


def jacobi_eigh(a, rtol=1e-12, max_sweeps=60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ascending and ``a @ V = V @ diag(w)``.
    Sweeps stop once ``off(A) <= rtol * ||A||_F``.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    v = np.eye(n)
    if n == 0:
        return np.zeros(0), v
    a = 0.5 * (a + a.T)
    fro = np.linalg.norm(a)
    target = rtol * fro
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def default_psd_tol(m):
    return 1e-8 * max(1.0, float(np.linalg.norm(m)))


def psd_check(m, tol=None):
    """Smallest eigenvalue of a symmetric matrix and a PSD verdict.

    The verdict is ``CERTIFIED`` when ``min_eig >= -tol`` and ``VIOLATED``
    otherwise. ``tol`` defaults to ``1e-8 * max(1, ||m||_F)``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    fro = float(np.linalg.norm(m))
    if m.shape[0] != m.shape[1]:
        raise NonSymmetric("matrix is not square")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12 * fro:
        raise NonSymmetric("matrix is not symmetric")
    if tol is None:
        tol = default_psd_tol(m)
    w, _ = jacobi_eigh(m)
    min_eig = float(w[0]) if w.size else 0.0
    return min_eig, (CERTIFIED if min_eig >= -tol else VIOLATED)
