"""Certified global minimization of quartically regularized cubic models.

Stationary points come from a damped Newton method started from several
points; the best one is then handed to the sharpest applicable certificate.
When certification fails and escalation is enabled, sigma is raised
geometrically up to the level at which the general certificate is guaranteed
to succeed.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import certificates as cert
from .bounds import g_is_zero, step_bounds, thresholds
from .errors import NonFinite, NotStationary, SolveFailed, Unbounded, WrongDimension
from .linalg import CERTIFIED
from .model import quick_norms

__all__ = [
    "SolveOptions",
    "SolveOutcome",
    "stationary_point",
    "newton_descent",
    "minimize_certified",
    "univariate_global",
    "schnabel_minimize",
    "CERTIFIED_GLOBAL",
    "LOCAL_ONLY",
    "ESCALATED",
    "FAILED",
]

CERTIFIED_GLOBAL = "CertifiedGlobal"
LOCAL_ONLY = "LocalOnly"
ESCALATED = "Escalated"
FAILED = "Failed"

SOS_CONVEX = "SoSConvex"


@dataclass(frozen=True)
class SolveOptions:
    nstarts: int = 20
    gtol: float = None
    nu: float = None
    escalate: bool = False
    gamma_up: float = 2.0
    seed: int = 0
    max_iter: int = 500
    tol: float = None
    threads: int = None


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    s_star: np.ndarray
    value: float
    grad_norm: float
    certificate: object
    status: str
    starts_used: int
    iterations: int
    sigma: float
    new_sigma: float = None
    extra: tuple = field(default_factory=tuple)
    notes: tuple = field(default_factory=tuple)

    @property
    def certified(self):
        return self.status in (CERTIFIED_GLOBAL, ESCALATED)

    def to_dict(self, include_matrix=True):
        c = self.certificate.to_dict() if self.certificate is not None else None
        if c is not None and not include_matrix:
            c.pop("matrix")
        out = {
            "s_star": [float(x) for x in self.s_star],
            "value": self.value,
            "grad_norm": self.grad_norm,
            "status": self.status,
            "sigma": self.sigma,
            "new_sigma": self.new_sigma,
            "starts_used": self.starts_used,
            "iterations": self.iterations,
            "certificate": c,
            "notes": list(self.notes),
        }
        if self.extra:
            out["extra_certificates"] = [e.to_dict() for e in self.extra]
        return out


def _default_gtol(g):
    return 1e-10 * (1.0 + float(np.linalg.norm(g)))


def newton_descent(fun, grad, hess, start, gtol, max_iter=500, second_order=False, step_cap=None):
    """Damped Newton on a smooth function with an eigenvalue-shifted Hessian.

    Returns ``(s, grad_norm, iterations)``. Every accepted step satisfies the
    Armijo condition, so the function value never increases. With
    ``second_order`` a negative-curvature step is taken at stationary points
    that are not local minimizers.
    """
    s = np.array(start, dtype=float)
    f = fun(s)
    if not np.isfinite(f):
        raise NonFinite("objective is not finite at the start")
    it = 0
    gr = grad(s)
    gn = float(np.linalg.norm(gr))
    while it < max_iter:
        Hs = hess(s)
        w, V = np.linalg.eigh(Hs)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(gr))):
            raise NonFinite("derivatives are not finite")
        if gn <= gtol:
            if not second_order or w[0] >= -1e-8 * max(1.0, abs(w[-1])):
                break
            d = V[:, 0] * np.sqrt(-w[0] / max(1.0, abs(w[-1]))) * max(1.0, np.linalg.norm(s))
            slope = 0.0
        else:
            shift = max(0.0, -w[0]) + 1e-8
            # the floor only matters when the shift is lost to rounding
            d = -V @ ((V.T @ gr) / np.maximum(w + shift, 1e-8))
            slope = float(gr @ d)
        cap = step_cap if step_cap is not None else 10.0 * (1.0 + np.linalg.norm(s))
        nd = np.linalg.norm(d)
        if nd > cap:
            d *= cap / nd
            slope *= cap / nd
        accepted = False
        if slope < 0.0 and -slope <= 1e-13 * (1.0 + abs(f)):
            # decrease below roundoff in f: judge the step by the gradient norm
            trial = s + d
            gt = float(np.linalg.norm(grad(trial)))
            it += 1
            if not gt < 0.5 * gn:
                break
            s, f, gn = trial, fun(trial), gt
            gr = grad(s)
            continue
        for cand in ((d, -d) if slope == 0.0 else (d,)):
            alpha = 1.0
            for _ in range(60):
                if alpha * cap < 1e-15 * (1.0 + np.linalg.norm(s)):
                    break
                trial = s + alpha * cand
                ft = fun(trial)
                if np.isfinite(ft) and ft <= f + 1e-4 * alpha * slope and (slope < 0.0 or ft < f):
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                break
        it += 1
        if not accepted:
            break
        s, f = trial, ft
        gr = grad(s)
        gn = float(np.linalg.norm(gr))
    return s, _polish(grad, hess, s, gn), it


def _polish(grad, hess, s, gn, steps=3):
    """A few unshifted Newton steps kept only if they shrink the gradient."""
    for _ in range(steps):
        try:
            d = np.linalg.solve(hess(s), grad(s))
        except np.linalg.LinAlgError:
            break
        trial = s - d
        gt = float(np.linalg.norm(grad(trial)))
        if not gt < gn:
            break
        s[:] = trial
        gn = gt
    return gn


def stationary_point(model, start, gtol=None, max_iter=500, second_order=False, step_cap=None):
    """Damped Newton from ``start`` on the model; returns ``(s, grad_norm, iters)``."""
    if gtol is None:
        gtol = _default_gtol(model.g)
    if not gtol > 0:
        raise ValueError("gtol must be positive")
    s, gn, it = newton_descent(
        model.value, model.gradient, model.hessian, start, gtol, max_iter, second_order, step_cap
    )
    return s, gn, it


def _start_points(model, nstarts, seed):
    n = model.n
    rng = np.random.default_rng(seed)
    norms = quick_norms(model)
    sig = model.sigma
    scales = [np.sqrt(norms.lambda_star / sig), norms.t_upper / sig, np.sqrt(norms.h_norm / sig)]
    if norms.g_norm > 0:
        sb = step_bounds(norms, sig)
        mid = sb.midpoint
        lo, hi = sb.lower / 2.0, 2.0 * sb.upper
        scales += [lo, hi]
    else:
        mid = max(max(scales), 1e-3)
    pos = [x for x in scales if x > 0]
    if not pos:
        pos = [1.0]
    lo, hi = min(pos) / 2.0, 2.0 * max(pos)
    starts = [np.zeros(n)]
    if norms.g_norm > 0:
        u = model.g / norms.g_norm
        starts += [-mid * u, mid * u]
    w, V = np.linalg.eigh(model.H)
    r = max(mid, np.sqrt(max(-w[0], 0.0) / sig))
    starts += [r * V[:, 0], -r * V[:, 0]]
    while len(starts) < nstarts:
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        starts.append(d * np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return starts[: max(nstarts, 1)], 2.0 * hi


def _threads(opts):
    if opts.threads is not None:
        return max(1, int(opts.threads))
    try:
        return max(1, int(os.environ.get("QC_THREADS", "1")))
    except ValueError:
        return 1


def _select(model, results):
    """Best value wins; near-ties go to the smaller norm, then lexicographic order."""
    m0 = model.value(np.zeros(model.n))
    ok = [r for r in results if r[3] <= m0 + 1e-12 * (1.0 + abs(m0))]
    if not ok:
        return None
    vmin = min(r[3] for r in ok)
    close = [r for r in ok if r[3] <= vmin + 1e-10 * (1.0 + abs(vmin))]
    close.sort(key=lambda r: (round(float(np.linalg.norm(r[0])), 9), tuple(np.round(r[0], 9))))
    return close[0]


def _solve_once(model, opts):
    gtol = opts.gtol if opts.gtol is not None else _default_gtol(model.g)
    starts, cap = _start_points(model, opts.nstarts, opts.seed)

    def run(x0):
        s, gn, it = stationary_point(model, x0, gtol, opts.max_iter, second_order=True, step_cap=cap)
        return s, gn, it, model.value(s)

    nthreads = _threads(opts)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            results = list(ex.map(run, starts))
    else:
        results = [run(x0) for x0 in starts]
    iters = sum(r[2] for r in results)
    return _select(model, results), len(starts), iters


def _certify(model, s, opts):
    notes = []
    gate = cert.stationarity_tol(model)
    try:
        c = cert.certify(model, s, nu=opts.nu, tol=opts.tol, gtol=gate)
    except NotStationary as exc:
        return None, [f"NotStationary: {exc}"]
    if c.verdict != CERTIFIED and g_is_zero(quick_norms(model)):
        w = np.linalg.eigvalsh(model.H)
        delta = float(w[0])
        if delta > 0:
            th = thresholds(quick_norms(model), delta)
            if model.sigma > th.sos_convex_sigma:
                notes.append("g = 0 and sigma exceeds the SoS-convex threshold")
                c = cert.Certificate(SOS_CONVEX, model.H, delta, CERTIFIED, 0.0, residual=c.residual)
            else:
                notes.append("g = 0: sigma below the SoS-convex threshold")
        else:
            notes.append("g = 0 with indefinite H: only exact-class certificates apply")
    return c, notes


def minimize_certified(model, opts=None, **kwargs):
    """Multistart minimization followed by a global-optimality certificate.

    Keyword arguments override fields of ``opts``.
    """
    opts = opts or SolveOptions()
    if kwargs:
        opts = SolveOptions(**{**opts.__dict__, **kwargs})
    if opts.nstarts < 1:
        raise ValueError("nstarts must be >= 1")
    if model.n == 1:
        return univariate_global(model)
    sigma0 = model.sigma
    cap = None
    total_iters = total_starts = 0
    notes = []
    current = model
    while True:
        best, nst, iters = _solve_once(current, opts)
        total_iters += iters
        total_starts += nst
        if best is None:
            return SolveOutcome(
                np.zeros(model.n), current.value(np.zeros(model.n)), float("nan"), None, FAILED,
                total_starts, total_iters, current.sigma, notes=("no stationary point below m(0)",),
            )
        s, gn, _, val = best
        c, cnotes = _certify(current, s, opts)
        if c is not None and c.verdict == CERTIFIED:
            escalated = current.sigma != sigma0
            return SolveOutcome(
                s, val, gn, c, ESCALATED if escalated else CERTIFIED_GLOBAL, total_starts, total_iters,
                current.sigma, new_sigma=current.sigma if escalated else None, notes=tuple(notes + cnotes),
            )
        if not opts.escalate:
            break
        if cap is None:
            th = thresholds(quick_norms(model))
            if not np.isfinite(th.sos_sigma):
                notes.append("escalation skipped: g = 0")
                break
            cap = 1.01 * th.sos_sigma
        if current.sigma >= cap:
            break
        current = current.with_sigma(min(current.sigma * opts.gamma_up, cap))
    status = LOCAL_ONLY if c is not None else FAILED
    return SolveOutcome(
        s, val, gn, c, status, total_starts, total_iters, current.sigma,
        new_sigma=current.sigma if current.sigma != sigma0 else None, notes=tuple(notes + cnotes),
    )


def univariate_global(model):
    """Exact global minimum for n = 1 from the real roots of the cubic derivative."""
    if model.n != 1:
        raise WrongDimension("univariate solver needs n = 1")
    g = float(model.g[0])
    H = float(model.H[0, 0])
    T = float(model.T.data[0, 0, 0])
    sig = model.sigma
    roots = np.roots([sig, T / 2.0, H, g])
    scale = 1.0 + np.max(np.abs(roots))
    real = [float(r.real) for r in roots if abs(r.imag) <= 1e-7 * scale]
    if not real:
        real = [float(roots[np.argmin(np.abs(roots.imag))].real)]

    def d1(x):
        return g + H * x + 0.5 * T * x * x + sig * x**3

    def d2(x):
        return H + T * x + 3.0 * sig * x * x

    polished = []
    for x in real:
        for _ in range(8):
            h = d2(x)
            if h == 0.0:
                break
            step = d1(x) / h
            if not abs(d1(x - step)) < abs(d1(x)):
                break
            x -= step
        polished.append(x)
    vals = [model.value(np.array([x])) for x in polished]
    order = sorted(range(len(polished)), key=lambda i: (vals[i], abs(polished[i])))
    x = polished[order[0]]
    s = np.array([x])
    c = cert.certify_univariate(model, s, gtol=False)
    return SolveOutcome(s, vals[order[0]], abs(d1(x)), c, CERTIFIED_GLOBAL, 1, len(polished), sig)


def _schnabel_screen(sch, tol):
    P = sch.complement_basis()
    if P.shape[1] == 0:
        return
    Hc = P.T @ sch.H @ P
    w, V = np.linalg.eigh(0.5 * (Hc + Hc.T))
    scale = max(1.0, np.max(np.abs(w)))
    if w[0] < -tol * scale:
        raise Unbounded("H has negative curvature on the complement of span{a_j}")
    gc = P.T @ sch.g
    null = V[:, np.abs(w) <= tol * scale]
    if null.size and np.linalg.norm(null.T @ gc) > tol * (1.0 + np.linalg.norm(sch.g)):
        raise Unbounded("g has a component along a flat direction of the model")


def schnabel_minimize(sch, opts=None, **kwargs):
    """Multistart minimization of a seminorm-regularized tensor model."""
    opts = opts or SolveOptions()
    if kwargs:
        opts = SolveOptions(**{**opts.__dict__, **kwargs})
    _schnabel_screen(sch, 1e-10)
    n = sch.n
    rng = np.random.default_rng(opts.seed)
    smin = float(np.min(sch.sigmas))
    hn = float(np.max(np.abs(np.linalg.eigvalsh(sch.H))))
    bn = float(np.max(np.linalg.norm(sch.b, axis=1) * np.linalg.norm(sch.a, axis=1) ** 2))
    gn0 = float(np.linalg.norm(sch.g))
    r = max((gn0 / smin) ** (1.0 / 3.0), np.sqrt(hn / smin), bn / smin, 1e-3)
    starts = [np.zeros(n)]
    while len(starts) < opts.nstarts:
        d = rng.normal(size=n)
        starts.append(d / np.linalg.norm(d) * r * np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
    gtol = opts.gtol if opts.gtol is not None else _default_gtol(sch.g)
    results = []
    iters = 0
    for x0 in starts:
        s, gn, it = newton_descent(sch.value, sch.gradient, sch.hessian, x0, gtol, opts.max_iter, second_order=True)
        iters += it
        results.append((s, gn, it, sch.value(s)))
    m0 = sch.value(np.zeros(n))
    ok = [x for x in results if x[3] <= m0 + 1e-12 * (1.0 + abs(m0))]
    if not ok:
        raise SolveFailed("no stationary point below m(0)")
    vmin = min(x[3] for x in ok)
    close = [x for x in ok if x[3] <= vmin + 1e-10 * (1.0 + abs(vmin))]
    close.sort(key=lambda x: (round(float(np.linalg.norm(x[0])), 9), tuple(np.round(x[0], 9))))
    s, gn, _, val = close[0]
    if not np.isfinite(val) or np.linalg.norm(s) > 1e8 * max(1.0, r):
        raise Unbounded("iterates diverge: the cubic coupling outweighs the seminorm regularization")
    gate = 1e-8 * (1.0 + gn0)
    suff = cert.certify_schnabel(sch, s, tol=opts.tol, gtol=gate)
    necc = cert.schnabel_necessary(sch, s, tol=opts.tol, gtol=gate)
    status = CERTIFIED_GLOBAL if suff.verdict == CERTIFIED else LOCAL_ONLY
    return SolveOutcome(s, val, gn, suff, status, len(starts), iters, smin, extra=(necc,))

