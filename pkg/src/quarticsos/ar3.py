"""Adaptive third-order regularization with certified subproblem solves.

Each iteration builds the cubic Taylor model of the objective, adds the
quartic regularization, minimizes it with ``minimize_certified`` and updates
the regularization weight from the ratio of actual to predicted decrease.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleFailure, Stalled
from .oracles import taylor_model
from .solver import SolveOptions, minimize_certified

__all__ = ["Ar3Config", "Ar3Record", "Ar3Trace", "BasinCell", "CSV_HEADER", "ar3_run", "basin_map"]

CONVERGED = "Converged"
MAX_ITER = "MaxIterations"
STALLED = "Stalled"
ORACLE_FAILURE = "OracleFailure"


@dataclass(frozen=True)
class Ar3Config:
    sigma0: float = 100.0
    sigma_min: float = 1e-8
    gamma1: float = 0.5
    gamma2: float = 2.0
    rho1: float = 0.1
    rho2: float = 0.9
    eps_g: float = 1e-3
    k_max: int = 3000
    max_rejections: int = 50
    inner: SolveOptions = field(default_factory=lambda: SolveOptions(nstarts=8))

    def __post_init__(self):
        if not (self.gamma2 > 1.0 > self.gamma1 > 0.0):
            raise ValueError("need gamma2 > 1 > gamma1 > 0")
        if not (self.rho2 > self.rho1 > 0.0):
            raise ValueError("need rho2 > rho1 > 0")
        if not (self.sigma_min > 0 and self.sigma0 > 0):
            raise ValueError("sigma0 and sigma_min must be positive")


@dataclass(frozen=True)
class Ar3Record:
    k: int
    x: np.ndarray
    f: float
    gnorm: float
    sigma: float
    rho: float
    accepted: bool
    inner_iters: int
    cert_kind: str
    cert_verdict: str
    status: str

    def csv_row(self):
        return [self.k, repr(self.f), repr(self.gnorm), repr(self.sigma), repr(self.rho), int(self.accepted),
                self.inner_iters, self.cert_kind, self.cert_verdict]


CSV_HEADER = ["k", "f", "gnorm", "sigma", "rho", "accepted", "inner_iters", "cert_kind", "cert_verdict"]


@dataclass(frozen=True)
class Ar3Trace:
    records: tuple
    x_final: np.ndarray
    f_final: float
    gnorm_final: float
    status: str
    iterations: int

    @property
    def converged(self):
        return self.status == CONVERGED

    def accepted_values(self):
        return [r.f for r in self.records if r.accepted]


def ar3_run(oracle, x0, cfg=None, raise_on_stall=False):
    """Run the adaptive method from ``x0`` until ``||grad f|| <= eps_g`` or ``k_max``.

    Iteration ``k`` counts evaluated trial steps, accepted or not. With
    ``raise_on_stall`` a run of ``max_rejections`` consecutive rejections
    raises ``Stalled``; otherwise it ends the run with that status.
    """
    cfg = cfg or Ar3Config()
    x = np.array(x0, dtype=float)
    sigma = cfg.sigma0
    records = []
    fx = oracle.value(x)
    gx = oracle.gradient(x)
    if not (np.isfinite(fx) and np.all(np.isfinite(gx))):
        raise OracleFailure("objective not finite at the start")
    gn = float(np.linalg.norm(gx))
    rejections = 0
    status = MAX_ITER
    k = 0
    while True:
        if gn <= cfg.eps_g:
            status = CONVERGED
            break
        if k >= cfg.k_max:
            break
        model = taylor_model(oracle, x, sigma)
        out = minimize_certified(model, cfg.inner)
        # a failed solve returns s = 0 or an unverified point; the ratio test rejects it if useless
        sigma = out.sigma
        s = out.s_star
        x_trial = x + s
        f_trial = oracle.value(x_trial)
        if not np.isfinite(f_trial):
            f_trial = np.inf
        pred = fx - model.taylor_value(s)
        rho = (fx - f_trial) / pred if pred > 0 else -np.inf
        accepted = rho > cfg.rho1
        kind = out.certificate.kind if out.certificate is not None else ""
        verdict = out.certificate.verdict if out.certificate is not None else ""
        records.append(Ar3Record(k, x.copy(), fx, gn, sigma, float(rho), bool(accepted), out.iterations, kind, verdict,
                                 out.status))
        if accepted:
            x = x_trial
            fx = f_trial
            gx = oracle.gradient(x)
            if not np.all(np.isfinite(gx)):
                raise OracleFailure("gradient not finite")
            gn = float(np.linalg.norm(gx))
            rejections = 0
            if rho > cfg.rho2:
                sigma = max(cfg.gamma1 * sigma, cfg.sigma_min)
        else:
            sigma = cfg.gamma2 * sigma
            rejections += 1
            if rejections >= cfg.max_rejections:
                if raise_on_stall:
                    raise Stalled(f"{rejections} consecutive rejections at iteration {k}")
                status = STALLED
                k += 1
                break
        k += 1
    return Ar3Trace(tuple(records), x, fx, gn, status, k)


@dataclass(frozen=True)
class BasinCell:
    x0: np.ndarray
    converged: bool
    iters: int
    final_dist: float
    status: str


def basin_map(oracle, lo=-4.0, hi=4.0, steps=9, cfg=None, target=None, dist_tol=1e-3, threads=None):
    """Run ``ar3_run`` from every point of a ``steps x steps`` grid on ``[lo, hi]^2``.

    A cell counts as converged when the run meets the gradient tolerance and,
    if ``target`` is given, ends within relative distance ``dist_tol`` of it.
    Oracle failures mark the cell and the sweep continues. Cells are
    returned in row-major order (first coordinate varying slowest).
    """
    if oracle.dim != 2:
        raise ValueError("basin_map needs a two-dimensional oracle")
    grid = np.linspace(lo, hi, steps)
    points = [np.array([a, b]) for a in grid for b in grid]
    tgt = None if target is None else np.asarray(target, dtype=float)

    def cell(x0):
        try:
            tr = ar3_run(oracle, x0, cfg)
        except OracleFailure:
            return BasinCell(x0, False, 0, float("nan"), ORACLE_FAILURE)
        if tgt is None:
            dist = float("nan")
            ok = tr.converged
        else:
            dist = float(np.linalg.norm(tr.x_final - tgt) / max(np.linalg.norm(tgt), 1e-300))
            ok = tr.converged and dist <= dist_tol
        return BasinCell(x0, bool(ok), tr.iterations, dist, tr.status)

    if threads is None:
        threads = int(os.environ.get("QC_THREADS", "1") or 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(cell, points))
    return [cell(p) for p in points]
