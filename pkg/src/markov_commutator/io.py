"""JSON and CSV exchange formats.

Schemas::

    kernel        {"n": int, "rows": [[float, ...], ...]}
    probability   {"n": int, "weights": [float, ...]}
    potential     {"N": int, "values": [float, ...]}
    decomposition {"eigenvalues": [...], "eigenvectors": [[column], ...], "mu": [...], "simple": bool}
    link          {"n_bar": int, "n": int, "rows": [[...]], "deterministic": bool}
    grid (CSV)    header ``x,y,k`` then one line per grid point
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .intertwine import Link, make_link
from .kernel import DEFAULT_TOL, MarkovKernel, Tolerances, validate_kernel, validate_probability
from .metropolis import Potential
from .spectral import SpectralDecomposition

__all__ = [
    "read_json",
    "kernel_from_json",
    "load_kernel",
    "probability_from_json",
    "probability_to_json",
    "potential_from_json",
    "load_potential",
    "decomposition_from_json",
    "link_from_json",
    "write_grid_csv",
    "read_grid_csv",
    "dumps",
]


def read_json(source):
    """Parse a path, a JSON string, or pass a dict through."""
    if isinstance(source, dict):
        return source
    text = str(source)
    if not text.lstrip().startswith(("{", "[")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def _field(doc, name, kind):
    if not isinstance(doc, dict) or name not in doc:
        raise ParseError(f"missing field {name!r}")
    value = doc[name]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise ParseError(f"field {name!r} must be an integer")
    if kind is list and not isinstance(value, list):
        raise ParseError(f"field {name!r} must be a list")
    return value


def _array(value, name, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {name!r} is not numeric") from exc
    if arr.ndim != ndim:
        raise ParseError(f"field {name!r} must be {ndim}-dimensional")
    return arr


def kernel_from_json(doc, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    n = _field(doc, "n", int)
    rows = _array(_field(doc, "rows", list), "rows", 2)
    if rows.shape != (n, n):
        raise ParseError(f"rows have shape {rows.shape}, expected ({n}, {n})")
    return validate_kernel(rows, tol)


def load_kernel(source, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    return kernel_from_json(read_json(source), tol)


def probability_from_json(doc, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    n = _field(doc, "n", int)
    w = _array(_field(doc, "weights", list), "weights", 1)
    if w.size != n:
        raise ParseError(f"weights have length {w.size}, expected {n}")
    return validate_probability(w, n, tol)


def probability_to_json(w) -> dict:
    w = np.asarray(w, dtype=float)
    return {"n": int(w.size), "weights": w.tolist()}


def potential_from_json(doc) -> Potential:
    N = _field(doc, "N", int)
    v = _array(_field(doc, "values", list), "values", 1)
    if v.size != N + 1:
        raise ParseError(f"values have length {v.size}, expected {N + 1}")
    return Potential(v)


def load_potential(source) -> Potential:
    return potential_from_json(read_json(source))


def decomposition_from_json(doc) -> SpectralDecomposition:
    w = _array(_field(doc, "eigenvalues", list), "eigenvalues", 1)
    cols = _array(_field(doc, "eigenvectors", list), "eigenvectors", 2)
    mu = _array(_field(doc, "mu", list), "mu", 1)
    n = w.size
    if cols.shape != (n, n) or mu.size != n:
        raise ParseError("decomposition fields have inconsistent sizes")
    return SpectralDecomposition(mu, w, cols.T.copy(), bool(doc.get("simple", False)))


def link_from_json(doc, tol: Tolerances = DEFAULT_TOL) -> Link:
    n_bar = _field(doc, "n_bar", int)
    n = _field(doc, "n", int)
    rows = _array(_field(doc, "rows", list), "rows", 2)
    if rows.shape != (n_bar, n):
        raise ParseError(f"rows have shape {rows.shape}, expected ({n_bar}, {n})")
    return make_link(rows, tol)


def write_grid_csv(k, target) -> None:
    """Write a square grid as ``x,y,k`` lines to a path or open file."""
    k = np.asarray(k, dtype=float)

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "k"])
        for x in range(k.shape[0]):
            for y in range(k.shape[1]):
                w.writerow([x, y, repr(float(k[x, y]))])

    if hasattr(target, "write"):
        emit(target)
    else:
        with open(target, "w", newline="") as fh:
            emit(fh)


def read_grid_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"x", "y", "k"}:
        raise ParseError("grid CSV must have header x,y,k")
    n = max(int(r["x"]) for r in rows) + 1
    k = np.zeros((n, n))
    for r in rows:
        k[int(r["x"]), int(r["y"])] = float(r["k"])
    return k


def _default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.ndarray, frozenset, set, tuple)):
        return sorted(obj) if isinstance(obj, (frozenset, set)) else list(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc, **kwargs) -> str:
    """``json.dumps`` that understands numpy scalars, arrays and package types."""
    return json.dumps(doc, default=_default, allow_nan=True, **kwargs)
