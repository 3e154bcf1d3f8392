"""JSON serialization of models.

Cubic model files look like::

    {"f0": 0.0, "g": [...], "H": [[...]], "sigma": 1.0,
     "T": [{"i": 0, "j": 0, "k": 1, "v": 2.5}, ...]}

with 0-based index triples ``i <= j <= k``, each listed at most once. Entries
that are absent are zero. Seminorm models carry ``"kind": "schnabel"`` and the
arrays ``a``, ``b`` and ``sigmas`` in place of ``T`` and ``sigma``.
"""

import json
import math

import numpy as np

from .errors import ModelFormatError
from .model import CubicModel, SymTensor3
from .schnabel import SchnabelModel

__all__ = [
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "loads_model",
    "load_model",
    "save_model",
    "sensor_to_dict",
]


def _finite(x, what):
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{what} must be a number") from exc
    if isinstance(x, bool) or not math.isfinite(v):
        raise ModelFormatError(f"{what} must be a finite number")
    return v


def _array(x, ndim, what):
    try:
        a = np.array(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{what} is not a numeric array") from exc
    if a.ndim != ndim:
        raise ModelFormatError(f"{what} must have {ndim} dimension(s), got {a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ModelFormatError(f"{what} has non-finite entries")
    return a


def _index(e, key, n):
    v = e.get(key) if isinstance(e, dict) else None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModelFormatError(f"tensor entry {e!r}: {key!r} must be an integer")
    if not 0 <= v < n:
        raise ModelFormatError(f"tensor entry {e!r}: index {key}={v} out of range for n={n}")
    return v


def _tensor(entries, n):
    if not isinstance(entries, list):
        raise ModelFormatError("'T' must be a list of {i, j, k, v} entries")
    seen = {}
    for e in entries:
        i, j, k = (_index(e, key, n) for key in "ijk")
        if not i <= j <= k:
            raise ModelFormatError(f"tensor entry ({i}, {j}, {k}) is not ordered i <= j <= k")
        if (i, j, k) in seen:
            raise ModelFormatError(f"duplicate tensor entry ({i}, {j}, {k})")
        seen[(i, j, k)] = _finite(e.get("v"), f"T[{i},{j},{k}]")
    return SymTensor3.from_unique(n, seen)


def _require(d, keys):
    missing = [k for k in keys if k not in d]
    if missing:
        raise ModelFormatError(f"missing field(s): {', '.join(missing)}")


def model_from_dict(d):
    """Build a ``CubicModel`` or ``SchnabelModel`` from its dictionary form."""
    if not isinstance(d, dict):
        raise ModelFormatError("model must be a JSON object")
    kind = d.get("kind", "cubic")
    try:
        if kind == "schnabel":
            _require(d, ("f0", "g", "H", "a", "b", "sigmas"))
            return SchnabelModel(
                _finite(d["f0"], "f0"),
                _array(d["g"], 1, "g"),
                _array(d["H"], 2, "H"),
                _array(d["a"], 2, "a"),
                _array(d["b"], 2, "b"),
                _array(d["sigmas"], 1, "sigmas"),
            )
        if kind != "cubic":
            raise ModelFormatError(f"unknown model kind {kind!r}")
        _require(d, ("f0", "g", "H", "T", "sigma"))
        g = _array(d["g"], 1, "g")
        return CubicModel(
            _finite(d["f0"], "f0"),
            g,
            _array(d["H"], 2, "H"),
            _tensor(d["T"], g.shape[0]),
            _finite(d["sigma"], "sigma"),
        )
    except ModelFormatError:
        raise
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc


def model_to_dict(model):
    """Dictionary form; floats survive a JSON round trip exactly."""
    if isinstance(model, SchnabelModel):
        return {
            "kind": "schnabel",
            "f0": model.f0,
            "g": model.g.tolist(),
            "H": model.H.tolist(),
            "a": model.a.tolist(),
            "b": model.b.tolist(),
            "sigmas": model.sigmas.tolist(),
        }
    T = [{"i": i, "j": j, "k": k, "v": v} for (i, j, k), v in sorted(model.T.unique_entries().items())]
    return {"f0": model.f0, "g": model.g.tolist(), "H": model.H.tolist(), "T": T, "sigma": model.sigma}


def dumps_model(model):
    return json.dumps(model_to_dict(model), sort_keys=True, indent=1)


def loads_model(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed JSON: {exc}") from exc
    return model_from_dict(d)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))
        fh.write("\n")


def sensor_to_dict(spec):
    """Anchors, true positions, noisy distances and start point of a sensor problem."""
    ex = spec.extra
    return {
        "kind": "sensor",
        "anchors": ex["anchors"].tolist(),
        "sensors_true": ex["sensors_true"].tolist(),
        "d_ss": ex["d_ss"].tolist(),
        "d_sa": ex["d_sa"].tolist(),
        "noise_level": float(ex["noise_level"]),
        "x0": spec.default_x0.tolist(),
    }
