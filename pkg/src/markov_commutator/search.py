"""Seeded random search for kernels without the hypergroup property.

Every trial draws a potential from its own seed, derived from the master
seed by ``SeedSequence(master).spawn``, builds the requested Metropolis
variant and certifies every base point.  Results come back in trial order
whatever the number of worker threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .commutator import LP_SIZE_LIMIT, check_hypergroup, commutator_membership_lp
from .errors import MarkovCommutatorError, UnknownVariant, ValidationError
from .io import potential_from_json
from .kernel import DEFAULT_TOL, Tolerances
from .metropolis import (
    VARIANTS,
    kernel_variant,
    random_convex_potential,
    random_ctilde_m_potential,
    random_ctilde_s_potential,
    reversible_measure,
)
from .spectral import decompose

__all__ = ["FAMILIES", "trial_seed", "draw_potential", "certify", "run_trial", "run_search",
           "summarize", "verify_witness"]

FAMILIES = ("convex", "ctilde-s", "ctilde-m")


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    """The seed of trial ``index``; equal to ``SeedSequence(seed).spawn(n)[index]``."""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def draw_potential(seq, N: int, family: str = "convex", asym: bool = False, slope_range=(0.0, 3.0)):
    if family == "convex":
        return random_convex_potential(seq, N, slope_range, asym)
    if family == "ctilde-s":
        return random_ctilde_s_potential(seq, N)
    if family == "ctilde-m":
        return random_ctilde_m_potential(seq, N)
    raise ValidationError(f"unknown potential family {family!r}; expected one of {FAMILIES}")


def certify(U, variant: str, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Hypergroup certificates of a Metropolis variant at every base point.

    Returns
    -------
    dict
        ``verdict`` is ``"holds"`` when some base point passes and ``"fails"``
        otherwise; ``hset`` lists the passing points and ``witness`` holds, for
        each failing base point, the most negative entry found together with
        the target point mass and the worst triple.
    """
    P = kernel_variant(U, variant, tol)
    mu = reversible_measure(U, variant)
    d = decompose(P, mu, tol)
    hs, witness = [], []
    for x0 in range(P.n):
        c = check_hypergroup(P, x0, tol, mu=mu, d=d)
        if c.holds:
            hs.append(x0)
            continue
        w = {"base_point": x0}
        if c.excluded_index is not None:
            w["vanishing_index"] = c.excluded_index
        else:
            x, v = min(c.failing_targets, key=lambda t: t[1])
            w.update(target=x, min_entry=v, triple=list(c.argmin_normalized),
                     min_normalized=c.min_normalized)
        witness.append(w)
    return {"verdict": "holds" if hs else "fails", "hset": hs, "witness": witness}


def run_trial(index: int, seed: int, N: int, variant: str, family: str = "convex", asym: bool = False,
              tol: Tolerances = DEFAULT_TOL, slope_range=(0.0, 3.0)) -> dict:
    """One search trial; errors are reported in the record, never raised."""
    rec = {"trial": index, "seed": seed, "N": N, "family": family, "variant": variant}
    try:
        U = draw_potential(trial_seed(seed, index), N, family, asym, slope_range)
        rec["potential"] = U.to_json()
        rec.update(certify(U, variant, tol))
    except MarkovCommutatorError as exc:
        rec["verdict"] = "error"
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def run_search(N: int, variant: str, trials: int, seed: int = 0, family: str = "convex", asym: bool = False,
               tol: Tolerances = DEFAULT_TOL, threads: int = 1, slope_range=(0.0, 3.0)):
    """Yield one record per trial, in trial order."""
    if variant not in VARIANTS:
        raise UnknownVariant(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if family not in FAMILIES:
        raise ValidationError(f"unknown potential family {family!r}; expected one of {FAMILIES}")
    if N < 2:
        raise ValidationError("the search needs N >= 2")

    def job(i):
        return run_trial(i, seed, N, variant, family, asym, tol, slope_range)

    if threads <= 1:
        for i in range(trials):
            yield job(i)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(job, range(trials))


def summarize(records, N: int, variant: str, seed: int, family: str = "convex", asym: bool = False) -> dict:
    counts = {"holds": 0, "fails": 0, "error": 0}
    first = None
    for r in records:
        counts[r["verdict"]] += 1
        if first is None and r["verdict"] == "fails":
            first = r["trial"]
    total = sum(counts.values())
    return {
        "summary": True,
        "N": N,
        "variant": variant,
        "family": family,
        "asym": asym,
        "seed": seed,
        "trials": total,
        "holds": counts["holds"],
        "fails": counts["fails"],
        "errors": counts["error"],
        "failure_rate": counts["fails"] / total if total else 0.0,
        "first_failure": first,
    }


def verify_witness(record: dict, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Re-check a failing record by two independent routes.

    The certificate is re-run on the recorded potential and variant and must
    reproduce every reported negativity.  Each witness ``(base_point,
    target)`` is also handed to the linear-programming membership test,
    which must find no Markov kernel commuting with the kernel whose row at
    ``base_point`` is the point mass at ``target`` (skipped above
    ``LP_SIZE_LIMIT`` states).
    """
    if record.get("verdict") != "fails":
        return False
    U = potential_from_json(record["potential"])
    fresh = certify(U, record["variant"], tol)
    if fresh["verdict"] != "fails":
        return False
    again = {w["base_point"]: w for w in fresh["witness"]}
    P = kernel_variant(U, record["variant"], tol)
    for w in record["witness"]:
        v = again.get(w["base_point"])
        if v is None:
            return False
        if "min_entry" in w:
            if not (v.get("target") == w["target"] and v["min_entry"] < -tol.tol_nonneg):
                return False
            if P.n <= LP_SIZE_LIMIT and commutator_membership_lp(P, w["base_point"], np.eye(P.n)[w["target"]], tol):
                return False
    return True
