"""Command-line interface.

Every command prints a JSON document with sorted keys on stdout. Without
``--json`` only the command's outputs are printed; with it they are wrapped in
a run report that also records the command, an input digest, the seed, the
wall time and the package version.

Exit codes: 0 certified (or success), 1 violated or inconclusive, 2 bad input,
3 candidate point not stationary.
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import certificates as cert
from .ar3 import CSV_HEADER, Ar3Config, ar3_run, basin_map
from .bounds import thresholds
from .errors import ModelFormatError, NotStationary, QuarticSosError, Unbounded, UnknownProblem
from .io import load_model
from .model import norm_bundle
from .problems import PROBLEM_NAMES, make_named, random_cubic_ball, random_sensor
from .schnabel import SchnabelModel
from .solver import SolveOptions, minimize_certified, schnabel_minimize

__all__ = ["main", "build_parser", "RunReport", "sweep_rows", "loglog_slope", "SWEEP_FAMILIES"]

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_INPUT = 2
EXIT_NOT_STATIONARY = 3

SWEEP_FAMILIES = ("fig1_homog", "fig1_nonhomog")
CLI_PROBLEMS = PROBLEM_NAMES + ("sensor",)


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunReport:
    command: str
    inputs_digest: str
    outputs: dict
    seed: int
    wall_time: float
    version: str

    def outputs_json(self):
        return _dumps(self.outputs)

    def to_dict(self):
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outputs": self.outputs,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "version": self.version,
        }


def _clean(x):
    """Make a structure strictly JSON-encodable (non-finite floats become strings)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def _dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False)


def _digest(args, files=()):
    h = hashlib.sha256()
    skip = {"func", "json"}
    h.update(_dumps({k: v for k, v in vars(args).items() if k not in skip}).encode())
    for f in files:
        with open(f, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def _threads():
    try:
        return max(1, int(os.environ.get("QC_THREADS", "1")))
    except ValueError:
        return 1


def _vector(text, what):
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"{what}: cannot parse {text!r} as numbers") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise InputError(f"{what}: need finite numbers")
    return np.array(vals)


def _load(path):
    try:
        return load_model(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _verdict_code(verdict):
    return EXIT_OK if verdict == cert.CERTIFIED else EXIT_NOT_CERTIFIED


def _problem(name, n, seed, noise):
    if name == "sensor":
        return random_sensor(2, 2, noise_level=noise, seed=seed)
    try:
        return make_named(name, n)
    except UnknownProblem as exc:
        raise InputError(f"unknown problem {name!r}; choose from {', '.join(CLI_PROBLEMS)}") from exc


# commands ------------------------------------------------------------------


def cmd_certify(args):
    model = _load(args.model)
    opts = SolveOptions(seed=args.seed, tol=args.tol, nu=args.nu, nstarts=args.nstarts)
    out = {}
    if isinstance(model, SchnabelModel):
        if args.s_star == "solve":
            res = schnabel_minimize(model, opts)
            s, suff, necc = res.s_star, res.certificate, res.extra[0]
        else:
            s = _point(args.s_star, model.n)
            suff = cert.certify_schnabel(model, s, tol=args.tol)
            necc = cert.schnabel_necessary(model, s, tol=args.tol)
        out.update(s_star=s, value=model.value(s), certificate=suff.to_dict(), necessary=necc.to_dict())
        return out, _verdict_code(suff.verdict)
    if args.s_star == "solve":
        res = minimize_certified(model, opts)
        out["solve"] = res.to_dict(include_matrix=False)
        if res.certificate is None:
            out["certificate"] = None
            stuck = any(n.startswith("NotStationary") for n in res.notes)
            return out, EXIT_NOT_STATIONARY if stuck else EXIT_NOT_CERTIFIED
        s, c = res.s_star, res.certificate
    else:
        s = _point(args.s_star, model.n)
        c = cert.certify(model, s, nu=args.nu, tol=args.tol)
    out.update(s_star=s, value=model.value(s), certificate=c.to_dict())
    return out, _verdict_code(c.verdict)


def _point(text, n):
    s = _vector(text, "--s-star")
    if s.shape != (n,):
        raise InputError(f"--s-star has {s.size} entries, model dimension is {n}")
    return s


def cmd_minimize(args):
    model = _load(args.model)
    opts = SolveOptions(nstarts=args.nstarts, nu=args.nu, escalate=args.escalate, seed=args.seed, tol=args.tol)
    if isinstance(model, SchnabelModel):
        res = schnabel_minimize(model, opts)
    else:
        res = minimize_certified(model, opts)
    return res.to_dict(), EXIT_OK if res.certified else EXIT_NOT_CERTIFIED


def cmd_sigma_bound(args):
    model = _load(args.model)
    if isinstance(model, SchnabelModel):
        raise InputError("sigma-bound needs a cubic model file")
    norms = norm_bundle(model, seed=args.seed)
    delta = args.delta
    if delta is None:
        lam = float(np.linalg.eigvalsh(model.H)[0])
        delta = lam if lam > 0 else None
    th = thresholds(norms, delta)
    return {"thresholds": th.to_dict(), "norms": vars(norms), "sigma": model.sigma}, EXIT_OK


def _ar3_config(args):
    return Ar3Config(
        sigma0=args.sigma0,
        eps_g=args.eps_g,
        k_max=args.kmax,
        inner=SolveOptions(nstarts=args.nstarts, seed=args.seed, tol=args.tol, escalate=args.escalate),
    )


def cmd_ar3(args):
    prob = _problem(args.problem, args.n, args.seed, args.noise)
    x0 = prob.default_x0 if args.x0 is None else _vector(args.x0, "--x0")
    if x0.shape != (prob.dim,):
        raise InputError(f"--x0 has {x0.size} entries, problem dimension is {prob.dim}")
    tr = ar3_run(prob.oracle, x0, _ar3_config(args))
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in tr.records:
                w.writerow(r.csv_row())
    out = {
        "problem": prob.name,
        "x0": x0,
        "x_final": tr.x_final,
        "f_final": tr.f_final,
        "gnorm_final": tr.gnorm_final,
        "iterations": tr.iterations,
        "status": tr.status,
    }
    return out, EXIT_OK if tr.converged else EXIT_NOT_CERTIFIED


def cmd_basin(args):
    prob = _problem(args.problem, 2, args.seed, args.noise)
    if prob.dim != 2:
        raise InputError("basin needs a two-dimensional problem")
    cells = basin_map(
        prob.oracle, args.lo, args.hi, args.steps, _ar3_config(args), target=prob.known_minimizer,
        dist_tol=args.dist_tol, threads=_threads(),
    )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x0_1", "x0_2", "converged", "iters", "final_dist", "status"])
        for c in cells:
            w.writerow([repr(float(c.x0[0])), repr(float(c.x0[1])), int(c.converged), c.iters, repr(c.final_dist),
                        c.status])
    n_ok = sum(c.converged for c in cells)
    out = {"problem": prob.name, "cells": len(cells), "converged": n_ok, "max_iters": max(c.iters for c in cells)}
    return out, EXIT_OK if n_ok == len(cells) else EXIT_NOT_CERTIFIED


def sweep_rows(family, grid, instances=20, n=3, seed=0, nstarts=20, threads=1):
    """One row per (sigma, instance) for the random cubic-ball families.

    Instance ``i`` draws its coefficients from ``default_rng(seed + i)`` and
    keeps them across the grid. Rows are sorted by sigma, then instance.
    """
    if family not in SWEEP_FAMILIES:
        raise InputError(f"unknown family {family!r}")
    homog = family == "fig1_homog"
    bases = [random_cubic_ball(n, 1.0, np.random.default_rng(seed + i), homogeneous=homog) for i in range(instances)]
    jobs = [(float(sig), i) for sig in sorted(grid) for i in range(instances)]

    def run(job):
        sig, i = job
        b = bases[i]
        model = type(b)(-sig, b.g, b.H, b.T, 4.0 * sig)
        res = minimize_certified(model, SolveOptions(nstarts=nstarts, seed=seed))
        return {
            "sigma": sig,
            "instance": i,
            "certified": bool(res.certified),
            "s_norm": float(np.linalg.norm(res.s_star)),
            "value": float(res.value),
            "status": res.status,
        }

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(run, jobs))
    return [run(j) for j in jobs]


def loglog_slope(rows):
    """Least-squares slope of log ||s*|| against log sigma over certified rows with s* != 0."""
    pts = [(math.log(r["sigma"]), math.log(r["s_norm"])) for r in rows if r["certified"] and r["s_norm"] > 0]
    if len(pts) < 2 or len({p[0] for p in pts}) < 2:
        return float("nan")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _grid(args):
    if args.grid is not None:
        vals = [v for v in args.grid.replace(",", " ").split()]
        try:
            grid = [float(v) for v in vals]
        except ValueError as exc:
            raise InputError(f"--grid: cannot parse {args.grid!r}") from exc
    else:
        grid = list(np.logspace(math.log10(args.sigma_min), math.log10(args.sigma_max), args.points))
    if not grid:
        raise InputError("sigma grid is empty")
    if not all(math.isfinite(g) and g > 0 for g in grid):
        raise InputError("sigma grid values must be positive and finite")
    return grid


def cmd_sweep(args):
    grid = _grid(args)
    rows = sweep_rows(args.family, grid, args.instances, args.n, args.seed, args.nstarts, _threads())
    cols = ["sigma", "instance", "certified", "s_norm", "value", "status"]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(r["sigma"]), r["instance"], int(r["certified"]), repr(r["s_norm"]), repr(r["value"]),
                        r["status"]])
    frac = {}
    for r in rows:
        frac.setdefault(r["sigma"], []).append(r["certified"])
    fractions = [[s, sum(v) / len(v)] for s, v in sorted(frac.items())]
    out = {"family": args.family, "rows": len(rows), "certified_fraction": fractions, "slope": loglog_slope(rows)}
    return out, EXIT_OK


# parser --------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="PSD tolerance for certificates")
    common.add_argument("--json", action="store_true", help="print the full run report")

    p = argparse.ArgumentParser(prog="quarticsos", description="Certified minimization of regularized cubic models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", parents=[common], help="certify global optimality of a point")
    c.add_argument("model", help="model JSON file")
    c.add_argument("--s-star", default="solve", help='candidate point "x1,x2,..." or "solve" (default)')
    c.add_argument("--nu", type=float, default=None, help="fixed nu for the general certificate")
    c.add_argument("--nstarts", type=int, default=20)
    c.set_defaults(func=cmd_certify)

    m = sub.add_parser("minimize", parents=[common], help="minimize a model and certify the result")
    m.add_argument("model", help="model JSON file")
    m.add_argument("--nu", type=float, default=None)
    m.add_argument("--nstarts", type=int, default=20)
    m.add_argument("--escalate", action="store_true", help="raise sigma until a certificate succeeds")
    m.set_defaults(func=cmd_minimize)

    s = sub.add_parser("sigma-bound", parents=[common], help="print the sigma thresholds of a model")
    s.add_argument("model", help="model JSON file")
    s.add_argument("--delta", type=float, default=None, help="lower bound on lambda_min(H)")
    s.set_defaults(func=cmd_sigma_bound)

    def outer(q):
        q.add_argument("--problem", default="nesterov_chebyshev", help=f"one of {', '.join(CLI_PROBLEMS)}")
        q.add_argument("--eps-g", type=float, default=1e-3)
        q.add_argument("--kmax", type=int, default=3000)
        q.add_argument("--sigma0", type=float, default=100.0)
        q.add_argument("--nstarts", type=int, default=8)
        q.add_argument("--escalate", action="store_true", help="escalate sigma inside subproblem solves")
        q.add_argument("--noise", type=float, default=1e-4, help="distance noise for the sensor problem")

    a = sub.add_parser("ar3", parents=[common], help="run the adaptive third-order method")
    outer(a)
    a.add_argument("--n", type=int, default=2, help="dimension for nesterov_chebyshev")
    a.add_argument("--x0", default=None, help='start point "x1,x2,..."')
    a.add_argument("--trace", default=None, help="write the iteration trace CSV here")
    a.set_defaults(func=cmd_ar3)

    b = sub.add_parser("basin", parents=[common], help="run the method from every point of a 2-D grid")
    outer(b)
    b.add_argument("--lo", type=float, default=-4.0)
    b.add_argument("--hi", type=float, default=4.0)
    b.add_argument("--steps", type=int, default=9)
    b.add_argument("--dist-tol", type=float, default=0.05, help="relative distance to the known minimizer")
    b.add_argument("--out", required=True, help="CSV output file")
    b.set_defaults(func=cmd_basin)

    w = sub.add_parser("sweep", parents=[common], help="random cubic-ball sweep over sigma")
    w.add_argument("--family", choices=SWEEP_FAMILIES, required=True)
    w.add_argument("--grid", default=None, help='explicit sigma values "s1,s2,..."')
    w.add_argument("--sigma-min", type=float, default=0.1)
    w.add_argument("--sigma-max", type=float, default=100.0)
    w.add_argument("--points", type=int, default=25)
    w.add_argument("--instances", type=int, default=20)
    w.add_argument("--n", type=int, default=3)
    w.add_argument("--nstarts", type=int, default=20)
    w.add_argument("--out", required=True, help="CSV output file")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        outputs, code = args.func(args)
    except (InputError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotStationary as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_STATIONARY
    except Unbounded as exc:
        print(f"error: model is unbounded below: {exc}", file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    except QuarticSosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    files = [args.model] if hasattr(args, "model") else []
    if args.json:
        report = RunReport(args.command, _digest(args, files), outputs, args.seed, time.perf_counter() - start,
                           __version__)
        print(_dumps(report.to_dict()))
    else:
        print(_dumps(outputs))
    return code


if __name__ == "__main__":
    sys.exit(main())
