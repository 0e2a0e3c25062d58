"""Pinned scenarios with known outcomes, runnable from the command line.

Each case returns a JSON-ready report whose ``passed`` field is the verdict.
Grids are fixed (seeded), so every run computes the same thing.
"""
from __future__ import annotations

import numpy as np

from . import corpus
from .commutator import check_hypergroup, check_min_weight, hset, is_in_commutator
from .errors import UnknownCase
from .kernel import DEFAULT_TOL, Tolerances
from .metropolis import (
    condition_H,
    gibbs_measure,
    kernel_MU,
    random_ctilde_m_potential,
    random_ctilde_s_potential,
)
from .wave import check_edges_condition, edge_sums_min, min_on_triangle, solve_wave, solve_wave_march

__all__ = ["CASES", "ctilde_s_grid", "ctilde_m_grid", "edges_corpus", "run_case", "run_all"]


def ctilde_s_grid(Ns=range(2, 11), per_N: int = 6, seed: int = 11) -> list:
    """Symmetric potentials with curvature at least ``2 ln 2``."""
    return [random_ctilde_s_potential(np.random.SeedSequence(seed, spawn_key=(N, i)), N)
            for N in Ns for i in range(per_N)]


def ctilde_m_grid(Ns=range(2, 8), per_N: int = 4, seed: int = 13) -> list:
    """Monotone potentials with curvature and end slopes at least ``2 ln 2``."""
    return [random_ctilde_m_potential(np.random.SeedSequence(seed, spawn_key=(N, i)), N)
            for N in Ns for i in range(per_N)]


def edges_corpus(seed: int = 17, random_count: int = 20, tol: Tolerances = DEFAULT_TOL) -> list:
    """Birth-and-death kernels meeting the edge-sum hypothesis.

    The lazy walk and its inward-reflected version for ``N = 2..10``, the
    symmetric potential grid, and random birth-and-death kernels kept only
    when they meet the hypothesis.
    """
    out = [corpus.m0_kernel(N) for N in range(2, 11)]
    out += [corpus.hat_kernel(N) for N in range(2, 11)]
    out += [kernel_MU(U, tol) for U in ctilde_s_grid(per_N=2)]
    rng = np.random.default_rng(seed)
    found = 0
    while found < random_count:
        P = corpus.random_birth_death(rng, int(rng.integers(2, 6)), 0.05, 0.5)
        if check_edges_condition(P, tol):
            out.append(P)
            found += 1
    return [P for P in out if check_edges_condition(P, tol)]


def _delta_fields(P, tol, mu=None):
    eye = np.eye(P.n)
    return [solve_wave(P, eye[y], tol, mu=mu) for y in range(P.n)]


def case_remark_finale_c(tol: Tolerances = DEFAULT_TOL) -> dict:
    """Lazy walk on three states from the unnormalised source ``(0, 1, 0)``."""
    P = corpus.m0_kernel(2)
    f = solve_wave_march(P, [0.0, 1.0, 0.0], tol, unnormalized=True)
    h = hset(P, tol)
    k11 = float(f.k[1, 1])
    return {"k11": k11, "k10": float(f.k[1, 0]), "hset": sorted(h),
            "passed": abs(k11 + 1.0) <= 1e-12 and not h}


def case_cyclic_hset(tol: Tolerances = DEFAULT_TOL, sizes=(3, 4, 5)) -> dict:
    """Cyclic walks: the feasibility route finds every state."""
    rows = []
    for n in sizes:
        h = hset(corpus.cyclic_walk(n), tol)
        rows.append({"n": n, "hset": sorted(h), "whole": h == frozenset(range(n))})
    return {"cycles": rows, "passed": all(r["whole"] for r in rows)}


def case_two_state_hset(tol: Tolerances = DEFAULT_TOL, count: int = 20, seed: int = 5) -> dict:
    """Two-state chains: the lighter state always qualifies."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(count):
        a, b = rng.uniform(0.05, 1.0, size=2)
        P = corpus.two_state(a, b)
        mu = np.array([b, a]) / (a + b)
        light = int(np.argmin(mu))
        h = hset(P, tol)
        rows.append({"a": a, "b": b, "hset": sorted(h), "ok": light in h and check_min_weight(P, h, tol)})
    return {"chains": rows, "passed": all(r["ok"] for r in rows)}


def case_prop3_grid(tol: Tolerances = DEFAULT_TOL) -> dict:
    """Metropolis kernels of both potential classes have the hypergroup
    property, at the lightest states."""
    bad = []
    count = 0
    for U in ctilde_m_grid() + ctilde_s_grid(per_N=2):
        count += 1
        mu = gibbs_measure(U)
        P = kernel_MU(U, tol)
        h = hset(P, tol, mu=mu)
        light = frozenset(np.flatnonzero(mu <= mu.min() * (1 + 1e-12)).tolist())
        if not h or not h <= light:
            bad.append({"potential": U.to_json(), "hset": sorted(h)})
    return {"potentials": count, "failures": bad, "passed": not bad}


def case_critere_family(tol: Tolerances = DEFAULT_TOL) -> dict:
    """Symmetric convex potentials: monotone rates, non-negative waves on the
    triangle, and hypergroup property exactly at both ends."""
    bad = []
    worst = np.inf
    grid = ctilde_s_grid()
    for U in grid:
        N = U.N
        mu = gibbs_measure(U)
        P = kernel_MU(U, tol)
        tri = min(min_on_triangle(f)[0] for f in _delta_fields(P, tol, mu))
        worst = min(worst, tri)
        ok = (condition_H(P, tol) and tri >= -1e-9
              and check_hypergroup(P, 0, tol, mu=mu).holds
              and check_hypergroup(P, N, tol, mu=mu).holds
              and hset(P, tol, mu=mu) == frozenset({0, N}))
        if not ok:
            bad.append(U.to_json())
    return {"potentials": len(grid), "min_triangle": float(worst), "failures": bad, "passed": not bad}


def case_edges_family(tol: Tolerances = DEFAULT_TOL) -> dict:
    """Kernels meeting the edge hypothesis keep both edge sums non-negative."""
    worst = np.inf
    kernels = edges_corpus(tol=tol)
    for P in kernels:
        for f in _delta_fields(P, tol):
            worst = min(worst, edge_sums_min(f))
    return {"kernels": len(kernels), "min_edge_sum": float(worst), "passed": worst >= -1e-9}


def case_semicontinuity(tol: Tolerances = DEFAULT_TOL, n_max: int = 10) -> dict:
    """``U_n = (1/n, 0)`` keeps only state 0 while the limit kernel keeps both."""
    rows = []
    for n in range(1, n_max + 1):
        h = hset(kernel_MU([1.0 / n, 0.0], tol), tol)
        rows.append({"n": n, "hset": sorted(h)})
    limit = hset(corpus.m0_kernel(1), tol)
    ok = all(r["hset"] == [0] for r in rows) and limit == frozenset({0, 1})
    return {"sequence": rows, "limit": sorted(limit), "passed": ok}


def case_desymetrisation(tol: Tolerances = DEFAULT_TOL) -> dict:
    """Mirrored monotone potentials lump back onto ``a M_U + (1 - a) I``."""
    rows = []
    for U in ctilde_m_grid():
        r = corpus.desymmetrize(U, tol)
        v = r["potential"]
        mu = gibbs_measure(v)
        holds = check_hypergroup(kernel_MU(v, tol), int(np.argmin(mu)), tol, mu=mu).holds
        rows.append({
            "N": U.N,
            "alpha": r["alpha"],
            "combination_residual": r["combination_residual"],
            "intertwining_residual": r["intertwining_residual"],
            "hypergroup": holds,
            "ok": (r["group_size"] == 2 and r["combination_residual"] <= 1e-12
                   and r["intertwining_residual"] <= 1e-12 and holds),
        })
    return {"potentials": rows, "passed": all(r["ok"] for r in rows)}


def _lumped_tensor(Pbar, mu_bar, mu2, m, samples, seed, tol):
    from .intertwine import conjugate_commutator
    from .spectral import decompose, is_uniplicit
    from .symmetry import quotient

    q = quotient(Pbar, corpus.coordinate_permutations(m), tol)
    P = q.kernel
    uniplicit = P.irreducible and is_uniplicit(decompose(P, tol=tol), tol)
    h = hset(P, tol) if uniplicit else frozenset()
    rng = np.random.default_rng(seed)
    members = []
    for Kbar in corpus.sample_tensor_commutator(mu2, m, rng, samples):
        K = conjugate_commutator(q.link, Kbar, mu_bar, tol, Pbar=Pbar)
        members.append(is_in_commutator(P, K, tol))
    return {"states": P.n, "birth_death": P.birth_death, "uniplicit": bool(uniplicit),
            "hset": sorted(h), "memberships": members}


def case_tensor_quotient(tol: Tolerances = DEFAULT_TOL, m: int = 3, samples: int = 10, seed: int = 3) -> dict:
    """Products of a two-state chain lumped by coordinate permutations.

    The one-coordinate-at-a-time chain lumps to a birth-and-death chain with
    simple spectrum and a nonempty hypergroup set; kernels commuting with
    the lifted chain, pushed down through the lumping, commute with the
    quotient.  The plain tensor power is reported alongside: its quotient
    has simple spectrum but several coordinates may flip in one step, so it
    is not birth-and-death.
    """
    a, b = 0.3, 0.2
    two = corpus.two_state(a, b)
    mu2 = np.array([b, a]) / (a + b)
    mu_bar = mu2
    for _ in range(m - 1):
        mu_bar = np.kron(mu_bar, mu2)
    avg = _lumped_tensor(corpus.coordinate_average(two, m), mu_bar, mu2, m, samples, seed, tol)
    power = _lumped_tensor(corpus.tensor_power(two, m), mu_bar, mu2, m, samples, seed, tol)
    ok = (avg["birth_death"] and avg["uniplicit"] and avg["hset"] and all(avg["memberships"])
          and power["uniplicit"] and power["hset"] and all(power["memberships"]))
    return {"coordinate_average": avg, "tensor_power": power, "passed": bool(ok)}


CASES = {
    "remark-finale-c": case_remark_finale_c,
    "cyclic-hset": case_cyclic_hset,
    "two-state-hset": case_two_state_hset,
    "prop3-grid": case_prop3_grid,
    "critere-family": case_critere_family,
    "edges-family": case_edges_family,
    "semicontinuity": case_semicontinuity,
    "desymetrisation": case_desymetrisation,
    "tensor-quotient": case_tensor_quotient,
}


def run_case(case_id: str, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Run one named case.

    Raises
    ------
    UnknownCase
    """
    fn = CASES.get(case_id)
    if fn is None:
        raise UnknownCase(f"unknown case {case_id!r}; expected one of {sorted(CASES)}")
    report = fn(tol)
    report = {"case": case_id, **report}
    report["passed"] = bool(report["passed"])
    return report


def run_all(tol: Tolerances = DEFAULT_TOL) -> list:
    return [run_case(c, tol) for c in CASES]
