"""Command-line interface.

Every command prints one JSON document (``search`` prints JSON lines) to
stdout.  Exit status is 0 on success, 1 when a checked expectation fails and
2 on invalid input.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import reproduce as _reproduce
from . import search as _search
from .commutator import check_hypergroup, check_min_weight, hset
from .errors import (
    InternalInconsistency,
    MarkovCommutatorError,
    ParseError,
    SizeLimitExceeded,
    ValidationError,
)
from .io import dumps, load_kernel, load_potential, probability_from_json, read_json, write_grid_csv
from .kernel import DEFAULT_TOL, Tolerances, is_reversible, stationary_distribution
from .metropolis import VARIANTS, condition_H, kernel_variant
from .spectral import decompose, is_uniplicit
from .symmetry import Permutation, quotient, symmetry_group
from .wave import edge_sums, min_on_triangle, solve_wave, solve_wave_march, wave_residual

__all__ = ["main", "build_parser", "analyze", "parse_source"]


def _emit(doc, args) -> None:
    text = dumps(doc)
    print(text)
    if getattr(args, "emit", None) and args.command != "wave":
        with open(args.emit, "w") as fh:
            fh.write(text + "\n")


def _tol(args) -> Tolerances:
    return DEFAULT_TOL.replace(tol_nonneg=args.tol_nonneg, tol_residual=args.tol_residual)


def analyze(P, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Everything the library can say about one kernel.

    Steps that do not apply (reducible or non-reversible kernels, sizes past
    the search limits) are skipped and explained in ``notes``.
    """
    report = {
        "n": P.n,
        "irreducible": P.irreducible,
        "birth_death": P.birth_death,
        "reversible": None,
        "uniplicit": None,
        "mu": None,
        "eigenvalues": None,
        "hset": None,
        "symmetry_group_size": None,
        "certificates": [],
        "condition_H": None,
        "min_weight": None,
        "notes": [],
    }
    try:
        report["symmetry_group_size"] = len(symmetry_group(P, tol))
    except SizeLimitExceeded as exc:
        report["notes"].append(f"SizeLimitExceeded: {exc}")
    if P.birth_death:
        report["condition_H"] = condition_H(P, tol)
    if not P.irreducible:
        report["notes"].append("NotIrreducible: hypergroup analysis skipped")
        return report
    mu = stationary_distribution(P, tol)
    report["mu"] = mu
    report["reversible"] = is_reversible(P.matrix, mu, tol)
    if not report["reversible"]:
        report["notes"].append("NotReversible: spectral analysis skipped")
        return report
    d = decompose(P, mu, tol)
    report["eigenvalues"] = d.eigenvalues
    report["uniplicit"] = is_uniplicit(d, tol)
    try:
        h = hset(P, tol, mu=mu, d=d)
    except SizeLimitExceeded as exc:
        report["notes"].append(f"SizeLimitExceeded: {exc}")
        return report
    report["hset"] = sorted(h)
    report["min_weight"] = check_min_weight(P, h, tol, mu=mu)
    if report["uniplicit"]:
        report["certificates"] = [check_hypergroup(P, x0, tol, mu=mu, d=d) for x0 in range(P.n)]
    return report


def parse_source(spec: str, n: int, unnormalized: bool):
    """``delta:i``, ``uniform``, ``row:a,b,...`` or a probability JSON file."""
    if spec.startswith("delta:"):
        try:
            i = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ParseError(f"bad source {spec!r}") from exc
        if not 0 <= i < n:
            raise ValidationError(f"source index {i} outside 0..{n - 1}")
        return np.eye(n)[i]
    if spec == "uniform":
        return np.full(n, 1.0 / n)
    if spec.startswith("row:"):
        try:
            v = np.array([float(t) for t in spec[4:].split(",")])
        except ValueError as exc:
            raise ParseError(f"bad source {spec!r}") from exc
        if v.size != n:
            raise ValidationError(f"source has {v.size} entries, expected {n}")
        return v
    doc = read_json(spec)
    if unnormalized:
        return np.asarray(doc.get("weights") if isinstance(doc, dict) else None, dtype=float)
    return probability_from_json(doc)


def cmd_analyze(args) -> int:
    tol = _tol(args)
    _emit(analyze(load_kernel(args.kernel, tol), tol), args)
    return 0


def cmd_metropolis(args) -> int:
    U = load_potential(args.potential)
    _emit(kernel_variant(U, args.variant, _tol(args)), args)
    return 0


def cmd_wave(args) -> int:
    tol = _tol(args)
    P = load_kernel(args.kernel, tol)
    src = parse_source(args.source, P.n, args.unnormalized)
    if args.unnormalized:
        field = solve_wave_march(P, src, tol, unnormalized=True)
    else:
        field = solve_wave(P, src, tol)
    tmin, at = min_on_triangle(field)
    vert, horiz = edge_sums(field)
    doc = {
        "N": field.N,
        "k": field.k,
        "source_row": field.source_row,
        "min_on_triangle": {"value": tmin, "at": list(at)},
        "edge_sums": {"vertical": vert, "horizontal": horiz},
        "residual": wave_residual(field.k, P),
    }
    if args.emit:
        write_grid_csv(field.k, args.emit)
    _emit(doc, args)
    return 0


def cmd_hypergroup(args) -> int:
    tol = _tol(args)
    P = load_kernel(args.kernel, tol)
    bases = range(P.n) if args.base is None else [args.base]
    if args.base is not None and not 0 <= args.base < P.n:
        raise ValidationError(f"base point {args.base} outside 0..{P.n - 1}")
    mu = stationary_distribution(P, tol)
    d = decompose(P, mu, tol)
    certs = [check_hypergroup(P, x0, tol, mu=mu, d=d) for x0 in bases]
    _emit({"certificates": certs, "holds_at": [c.base_point for c in certs if c.holds]}, args)
    return 0


def cmd_symmetry(args) -> int:
    tol = _tol(args)
    G = symmetry_group(load_kernel(args.kernel, tol), tol)
    _emit({"order": len(G), "group": G}, args)
    return 0


def cmd_quotient(args) -> int:
    tol = _tol(args)
    P = load_kernel(args.kernel, tol)
    if args.group:
        doc = read_json(args.group)
        maps = doc["group"] if isinstance(doc, dict) else doc
        try:
            G = [Permutation(tuple(g)) for g in maps]
        except (TypeError, KeyError) as exc:
            raise ParseError("group must be a list of permutations") from exc
    else:
        G = symmetry_group(P, tol)
    _emit(quotient(P, G, tol), args)
    return 0


def cmd_search(args) -> int:
    tol = _tol(args)
    records = []
    out = open(args.emit, "w") if args.emit else None
    try:
        stream = _search.run_search(args.N, args.variant, args.trials, args.seed, args.family, args.asym,
                                    tol, args.threads, (args.slope_lo, args.slope_hi))
        for rec in stream:
            records.append(rec)
            line = dumps(rec)
            print(line, flush=True)
            if out:
                out.write(line + "\n")
        summary = dumps(_search.summarize(records, args.N, args.variant, args.seed, args.family, args.asym))
        print(summary)
        if out:
            out.write(summary + "\n")
    finally:
        if out:
            out.close()
    return 0


def cmd_reproduce(args) -> int:
    tol = _tol(args)
    if args.case == "all":
        reports = _reproduce.run_all(tol)
        _emit({"cases": reports, "passed": all(r["passed"] for r in reports)}, args)
        return 0 if all(r["passed"] for r in reports) else 1
    report = _reproduce.run_case(args.case, tol)
    _emit(report, args)
    return 0 if report["passed"] else 1


def _add_globals(p, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tol-nonneg", type=float, default=d(DEFAULT_TOL.tol_nonneg),
                   help="non-negativity threshold (default %(default)s)")
    p.add_argument("--tol-residual", type=float, default=d(DEFAULT_TOL.tol_residual),
                   help="residual threshold (default %(default)s)")
    p.add_argument("--seed", type=int, default=d(0), help="master seed")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for search")
    p.add_argument("--emit", default=d(None), metavar="PATH",
                   help="also write the output here (CSV grid for wave)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markov-commutator", description=__doc__.splitlines()[0])
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="full report on a kernel")
    p.add_argument("--kernel", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("metropolis", parents=[common], help="build a Metropolis kernel")
    p.add_argument("--potential", required=True)
    p.add_argument("--variant", choices=VARIANTS, default="mu")
    p.set_defaults(func=cmd_metropolis)

    p = sub.add_parser("wave", parents=[common], help="solve the wave equation of a birth-and-death kernel")
    p.add_argument("--kernel", required=True)
    p.add_argument("--source", required=True, help="delta:i, uniform, row:a,b,... or a probability JSON file")
    p.add_argument("--unnormalized", action="store_true",
                   help="use the source as the row k(., 0) without normalisation")
    p.set_defaults(func=cmd_wave)

    p = sub.add_parser("hypergroup", parents=[common], help="certificates at one or all base points")
    p.add_argument("--kernel", required=True)
    p.add_argument("--base", type=int)
    p.set_defaults(func=cmd_hypergroup)

    p = sub.add_parser("symmetry", parents=[common], help="permutations preserving a kernel")
    p.add_argument("--kernel", required=True)
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("quotient", parents=[common], help="lump the orbits of a symmetry group")
    p.add_argument("--kernel", required=True)
    p.add_argument("--group", help="JSON list of permutations (default: full symmetry group)")
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("search", parents=[common], help="seeded random search, JSON lines")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--variant", choices=VARIANTS, default="paren")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--family", choices=_search.FAMILIES, default="convex")
    p.add_argument("--asym", action="store_true", help="U(0) = U(1) and not mirror symmetric")
    p.add_argument("--slope-lo", type=float, default=0.0)
    p.add_argument("--slope-hi", type=float, default=3.0)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("reproduce", parents=[common], help="run a pinned scenario")
    p.add_argument("case", choices=sorted(_reproduce.CASES) + ["all"])
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InternalInconsistency as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (MarkovCommutatorError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
