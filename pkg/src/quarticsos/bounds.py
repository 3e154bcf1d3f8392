"""Closed-form regularization thresholds and step-norm bounds.

Every formula consumes ``norms.t_upper`` (the Frobenius norm of T) wherever a
tensor norm appears. All thresholds are increasing in the tensor norm, so an
over-estimate keeps them valid.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import psd_check

__all__ = [
    "SigmaThresholds",
    "StepBounds",
    "g_is_zero",
    "thresholds",
    "sos_sigma_full",
    "step_bounds",
    "convexify_radius",
    "necessary_matrix",
    "sufficient_matrix",
]

INF = float("inf")


@dataclass(frozen=True)
class SigmaThresholds:
    step_bound_sigma: float
    sos_sigma: float
    local_convex_sigma: float
    sos_convex_sigma: float
    necc_suff_sigma: float
    g_zero: bool
    delta: float = float("nan")

    def to_dict(self):
        def enc(x):
            if np.isnan(x):
                return None
            return "inf" if np.isinf(x) else x

        return {
            "step_bound_sigma": enc(self.step_bound_sigma),
            "sos_sigma": enc(self.sos_sigma),
            "local_convex_sigma": enc(self.local_convex_sigma),
            "sos_convex_sigma": enc(self.sos_convex_sigma),
            "necc_suff_sigma": enc(self.necc_suff_sigma),
            "g_zero": self.g_zero,
            "delta": enc(self.delta),
        }


@dataclass(frozen=True)
class StepBounds:
    lower: float
    upper: float
    not_guaranteed: bool = False

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


def g_is_zero(norms):
    return norms.g_norm < 1e-12 * (1.0 + norms.h_norm)


def thresholds(norms, delta=None):
    """All sigma thresholds for the model summarized by ``norms``.

    ``delta`` is a lower bound on ``lambda_min(H)``; without it (or when it is
    not positive) the two convexity thresholds are NaN.
    """
    H, lam, T, g = norms.h_norm, norms.lambda_star, norms.t_upper, norms.g_norm
    gz = g_is_zero(norms)
    if gz:
        step = sos = necc = INF
    else:
        step = max(9.0 * H**3 / g**2, np.sqrt(3.0 * T**3 / (8.0 * g)))
        sos = max(9.0 * 6**3 * H**3 / g**2, np.sqrt(3.0 * 32**3 * T**3 / g))
        necc = 9.0 * max(27.0 * lam**3 / g**2, H**3 / g**2, np.sqrt(T**3 / g))
    if delta is not None and delta > 0:
        loc = T**2 / (4.0 * delta)
        sosc = 8.0 * T**2 / delta
        d = float(delta)
    else:
        loc = sosc = d = float("nan")
    return SigmaThresholds(step, sos, loc, sosc, necc, gz, d)


def sos_sigma_full(norms):
    """The four-term form of the certification threshold.

    It never exceeds ``thresholds(norms).sos_sigma`` because ``lambda* <= ||H||``.
    """
    H, lam, T, g = norms.h_norm, norms.lambda_star, norms.t_upper, norms.g_norm
    if g_is_zero(norms):
        return INF
    return max(
        9.0 * H**3 / g**2,
        np.sqrt(3.0 * T**3 / (8.0 * g)),
        np.sqrt(3.0 * 32**3 * T**3 / g),
        9.0 * 6**3 * lam**3 / g**2,
    )


def step_bounds(norms, sigma):
    """``(||g||/(3 sigma))^(1/3) <= ||s*|| <= 2 (||g||/sigma)^(1/3)``.

    The bounds hold for global minimizers once ``sigma`` reaches the
    step-bound threshold; below it they are returned flagged.
    """
    g = norms.g_norm
    lower = (g / (3.0 * sigma)) ** (1.0 / 3.0)
    upper = 2.0 * (g / sigma) ** (1.0 / 3.0)
    return StepBounds(lower, upper, not_guaranteed=bool(sigma < thresholds(norms).step_bound_sigma))


def convexify_radius(norms, s0):
    """Smallest sigma making the model convex on ``||s|| >= s0``."""
    if not s0 > 0:
        raise ValueError("s0 must be positive")
    return 2.0 * max(norms.lambda_star / s0**2, norms.t_upper / s0)


def necessary_matrix(model, s_star, norms, tol=None):
    """``B_N``: must be PSD at any global minimizer. Returns (matrix, min_eig, verdict)."""
    s = np.asarray(s_star, dtype=float)
    r = float(np.linalg.norm(s))
    B = (
        model.H
        + (2.0 / 3.0) * model.T.apply1(s)
        + (model.sigma * r * r + norms.t_upper * r / 3.0) * np.eye(model.n)
    )
    B = 0.5 * (B + B.T)
    return (B, *psd_check(B, tol))


def sufficient_matrix(model, s_star, norms, tol=None):
    """``B_S``: PSD at a stationary point proves global optimality."""
    s = np.asarray(s_star, dtype=float)
    r = float(np.linalg.norm(s))
    T = norms.t_upper
    sig = model.sigma
    B = (
        model.H
        + (2.0 / 3.0) * model.T.apply1(s)
        + (sig * r * r - T * r / 3.0 - T * T / (18.0 * sig)) * np.eye(model.n)
    )
    B = 0.5 * (B + B.T)
    return (B, *psd_check(B, tol))

