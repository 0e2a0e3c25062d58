"""Convex potentials and Metropolis birth-and-death kernels built from them.

Five constructions share one pattern: an exploration kernel proposes a
nearest-neighbour move and an acceptance factor depending on the potential
reweights it, the diagonal absorbing the remaining mass.

``mu``
    symmetric exploration (1/2 each way), acceptance ``exp((U(x)-U(y))/2)``,
    rows scaled by the largest off-diagonal row mass.
``tilde``
    as ``mu`` but the right end always steps back.
``hat``
    as ``mu`` but both ends always step inwards.
``paren``
    ``hat`` exploration with the classical acceptance ``exp(-(U(y)-U(x))+)``
    and no scaling.
``check``
    exploration ``2**-(x ^ (N-x))`` each way with the classical acceptance
    applied to ``U(x) + ln2 * (x ^ (N-x))`` (``^`` being the minimum).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotBirthDeath, UnknownVariant, ValidationError
from .kernel import DEFAULT_TOL, MarkovKernel, Tolerances, as_kernel, validate_kernel

__all__ = [
    "Potential",
    "PotentialClass",
    "VARIANTS",
    "LN2",
    "classify_potential",
    "gibbs_measure",
    "exploration_kernel",
    "kernel_MU",
    "kernel_variant",
    "metropolis_kernel",
    "reversible_measure",
    "sigma",
    "condition_H",
    "random_convex_potential",
    "random_ctilde_s_potential",
    "random_ctilde_m_potential",
    "symmetrize_potential",
    "check_transform",
]

LN2 = float(np.log(2.0))
VARIANTS = ("mu", "tilde", "hat", "check", "paren")
CTILDE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class Potential:
    """Real function on ``0..N``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 1:
            raise ValidationError("a potential needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValidationError("potential values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size - 1

    def __len__(self):
        return self.values.size

    def to_json(self) -> dict:
        return {"N": self.N, "values": self.values.tolist()}


def _as_potential(U) -> Potential:
    return U if isinstance(U, Potential) else Potential(U)


@dataclass(frozen=True)
class PotentialClass:
    """Membership flags of a potential.

    ``in_C``: convex.  ``in_Ctilde``: convex with every second difference at
    least ``2 ln 2``.  ``in_Ctilde_m``: additionally monotone with both end
    slopes of size at least ``2 ln 2``.  ``in_Ctilde_s``: additionally
    symmetric about ``N/2``.  ``in_Ccheck_s``: symmetric and convex after
    adding ``ln 2 * min(x, N-x)``.
    """

    in_C: bool
    in_Ctilde: bool
    in_Ctilde_m: bool
    in_Ctilde_s: bool
    in_Ccheck_s: bool
    monotone: bool
    symmetric: bool


def check_transform(U) -> np.ndarray:
    """``U(x) + ln 2 * min(x, N - x)``."""
    v = _as_potential(U).values
    x = np.arange(v.size)
    return v + LN2 * np.minimum(x, v.size - 1 - x)


def classify_potential(U) -> PotentialClass:
    """Classify a potential on ``0..N``.

    Convexity and monotonicity compare first differences exactly and
    symmetry compares ``U(x)`` with ``U(N-x)`` exactly.  The ``2 ln 2`` gap
    and the convexity of the shifted potential allow a ``1e-12`` slack,
    since both involve the irrational ``ln 2``.

    Examples
    --------
    >>> classify_potential([0.0, 0.0, 0.0]).in_Ctilde
    False
    """
    v = _as_potential(U).values
    d = np.diff(v)
    dd = np.diff(d)
    in_C = bool(np.all(dd >= 0))
    in_Ct = in_C and bool(np.all(dd >= 2 * LN2 - CTILDE_SLACK))
    monotone = bool(np.all(d >= 0) or np.all(d <= 0))
    symmetric = bool(np.array_equal(v, v[::-1]))
    ends = min(abs(d[0]), abs(d[-1])) if d.size else 0.0
    in_Ctm = in_Ct and monotone and ends >= 2 * LN2 - CTILDE_SLACK
    in_Cts = in_Ct and symmetric
    in_Ccs = symmetric and bool(np.all(np.diff(np.diff(check_transform(v))) >= -CTILDE_SLACK))
    return PotentialClass(*(bool(f) for f in (in_C, in_Ct, in_Ctm, in_Cts, in_Ccs, monotone, symmetric)))


def gibbs_measure(U) -> np.ndarray:
    """Probability proportional to ``exp(-U(x))``."""
    v = _as_potential(U).values
    w = np.exp(-(v - v.min()))
    return w / w.sum()


def exploration_kernel(N: int, kind: str) -> np.ndarray:
    """Off-diagonal proposal weights on ``0..N`` (zero diagonal).

    ``kind`` is one of ``mu`` (1/2 to each neighbour), ``tilde`` (right end
    steps back with weight 1), ``hat`` (both ends step inwards with weight 1)
    or ``check`` (weight ``2**-min(x, N-x)`` to each neighbour).
    """
    E = np.zeros((N + 1, N + 1))
    for x in range(N + 1):
        for y in (x - 1, x + 1):
            if not 0 <= y <= N:
                continue
            if kind == "mu":
                w = 0.5
            elif kind == "tilde":
                w = 1.0 if x == N else 0.5
            elif kind == "hat":
                w = 1.0 if x in (0, N) else 0.5
            elif kind == "check":
                w = 0.5 ** min(x, N - x)
            else:
                raise UnknownVariant(f"unknown exploration kernel {kind!r}")
            E[x, y] = w
    return E


def _complete(off: np.ndarray, tol: Tolerances) -> MarkovKernel:
    np.fill_diagonal(off, 0.0)
    diag = 1.0 - off.sum(axis=1)
    # rows with maximal mass may land a rounding step below zero
    diag[(diag < 0) & (diag > -64 * np.finfo(float).eps)] = 0.0
    np.fill_diagonal(off, diag)
    return validate_kernel(off, tol)


def _half_weights(E: np.ndarray, v: np.ndarray) -> np.ndarray:
    return E * np.exp((v[:, None] - v[None, :]) / 2.0)


def sigma(U, kind: str = "mu") -> float:
    """Largest off-diagonal row mass of the ``exp((U(x)-U(y))/2)`` weighting."""
    v = _as_potential(U).values
    return float(_half_weights(exploration_kernel(v.size - 1, kind), v).sum(axis=1).max())


def metropolis_kernel(U, exploration: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """``E(x,y) exp((U(x)-U(y))/2) / Sigma`` off the diagonal, rows completed.

    ``Sigma`` is the largest off-diagonal row mass, so every diagonal entry
    is non-negative and at least one row has an empty diagonal.
    """
    v = _as_potential(U).values
    W = _half_weights(np.asarray(exploration, dtype=float), v)
    return _complete(W / W.sum(axis=1).max(), tol)


def _classical(E: np.ndarray, v: np.ndarray, tol: Tolerances) -> MarkovKernel:
    rise = np.maximum(v[None, :] - v[:, None], 0.0)
    return _complete(E * np.exp(-rise), tol)


def kernel_MU(U, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """Classical Metropolis kernel with symmetric nearest-neighbour exploration.

    Examples
    --------
    >>> kernel_MU([0.0, 0.0, 0.0]).matrix.tolist()
    [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]
    """
    v = _as_potential(U).values
    return metropolis_kernel(v, exploration_kernel(v.size - 1, "mu"), tol)


def kernel_variant(U, variant: str, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """One of the five Metropolis constructions, by name (see module doc)."""
    v = _as_potential(U).values
    N = v.size - 1
    if variant == "mu":
        return kernel_MU(v, tol)
    if variant in ("tilde", "hat"):
        return metropolis_kernel(v, exploration_kernel(N, variant), tol)
    if variant == "paren":
        return _classical(exploration_kernel(N, "hat"), v, tol)
    if variant == "check":
        return _classical(exploration_kernel(N, "check"), check_transform(v), tol)
    raise UnknownVariant(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")


def reversible_measure(U, variant: str = "mu") -> np.ndarray:
    """Reversible probability of ``kernel_variant(U, variant)``.

    Every construction is reversible with respect to ``nu(x) exp(-U(x))``
    where ``nu`` is the reversible measure of its exploration kernel.  For
    ``mu`` and ``check`` this is the Gibbs measure itself; ``tilde``,
    ``hat`` and ``paren`` tilt it at the ends.
    """
    v = _as_potential(U).values
    N = v.size - 1
    if variant not in VARIANTS:
        raise UnknownVariant(f"unknown variant {variant!r}")
    kind = {"paren": "hat"}.get(variant, variant)
    if variant == "check":
        return gibbs_measure(v)
    E = exploration_kernel(N, kind)
    log_nu = np.zeros(N + 1)
    for x in range(N):
        log_nu[x + 1] = log_nu[x] + np.log(E[x, x + 1]) - np.log(E[x + 1, x])
    w = log_nu - v
    w = np.exp(w - w.max())
    return w / w.sum()


def condition_H(P, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Monotonicity condition on the left half of a birth-and-death kernel.

    For ``x`` in ``0..floor(N/2)``, ``2**x P(x, x+1)`` must be
    non-increasing and ``P(x+1, x)`` non-decreasing, each up to
    ``tol_residual``.

    Raises
    ------
    NotBirthDeath
    """
    P = as_kernel(P, tol)
    if not P.birth_death:
        raise NotBirthDeath("condition (H) is defined for birth-and-death kernels")
    M = P.matrix
    N = P.N
    if N < 1:
        return True
    xs = np.arange(min(N // 2, N - 1) + 1)
    up = np.ldexp(M[xs, xs + 1], xs)
    down = M[xs + 1, xs]
    return bool(np.all(np.diff(up) <= tol.tol_residual) and np.all(np.diff(down) >= -tol.tol_residual))


def random_convex_potential(seed, N: int, slope_range=(0.0, 3.0), asym: bool = False) -> Potential:
    """Draw a convex potential on ``0..N``.

    Second differences are i.i.d. uniform on ``slope_range``; they are summed
    twice from ``U(0) = 0``.  The initial slope is uniform on
    ``[-(sum of increments), 0]``, so that the minimum can sit anywhere, or
    exactly 0 when ``asym`` is set.  In the latter case ``U(0) = U(1)`` and
    draws that are symmetric about ``N/2`` are rejected.

    Parameters
    ----------
    seed : int or numpy.random.SeedSequence
    N : int
        At least 2.
    slope_range : (float, float)
        Range of the second differences, non-negative.
    asym : bool
    """
    if N < 2:
        raise ValidationError("random potentials need N >= 2")
    lo, hi = map(float, slope_range)
    if lo < 0 or hi < lo:
        raise ValidationError(f"invalid slope range {slope_range!r}")
    rng = np.random.default_rng(seed)
    while True:
        c = rng.uniform(lo, hi, size=N - 1)
        d0 = 0.0 if asym else -rng.uniform(0.0, c.sum())
        d = d0 + np.concatenate(([0.0], np.cumsum(c)))
        U = np.concatenate(([0.0], np.cumsum(d)))
        if not asym or not np.allclose(U, U[::-1], rtol=0, atol=1e-12):
            return Potential(U)


def random_ctilde_s_potential(seed, N: int, extra_range=(0.0, 0.5)) -> Potential:
    """Symmetric potential whose second differences are ``2 ln 2`` plus a
    uniform draw from ``extra_range`` (mirrored so symmetry is exact)."""
    if N < 1:
        raise ValidationError("N must be at least 1")
    rng = np.random.default_rng(seed)
    lo, hi = map(float, extra_range)
    half = rng.uniform(lo, hi, size=N // 2) + 2 * LN2
    c = np.concatenate((half, half[::-1][(N - 1) % 2:])) if N > 1 else np.zeros(0)
    d0 = -c.sum() / 2.0
    d = d0 + np.concatenate(([0.0], np.cumsum(c)))
    U = np.concatenate(([0.0], np.cumsum(d)))
    U = U - U.min()
    for x in range(N // 2 + 1):
        U[N - x] = U[x]
    return Potential(U)


def random_ctilde_m_potential(seed, N: int, extra_range=(0.0, 0.3), increasing: bool | None = None) -> Potential:
    """Monotone potential with second differences ``2 ln 2 + extra`` and a
    smallest end slope of ``2 ln 2 + extra``.

    ``increasing=None`` picks the direction from the seed.
    """
    if N < 2:
        raise ValidationError("N must be at least 2")
    rng = np.random.default_rng(seed)
    lo, hi = map(float, extra_range)
    c = rng.uniform(lo, hi, size=N - 1) + 2 * LN2
    last = -(2 * LN2 + rng.uniform(lo, hi))
    # non-increasing: slopes d_0 <= ... <= d_{N-1} = last < 0
    d = last - np.concatenate((np.cumsum(c[::-1])[::-1], [0.0]))
    U = np.concatenate(([0.0], np.cumsum(d)))
    U = U - U.min()
    if increasing is None:
        increasing = bool(rng.integers(2))
    return Potential(U[::-1].copy() if increasing else U)


def symmetrize_potential(U) -> Potential:
    """Mirror a monotone potential on ``0..N`` into one on ``0..2N+1``.

    The potential is first reversed if needed so that it is non-increasing;
    then ``Ubar(x) = U(x)`` for ``x <= N`` and ``Ubar(x) = U(2N+1-x)``
    beyond.
    """
    v = _as_potential(U).values
    if v[-1] > v[0]:
        v = v[::-1]
    return Potential(np.concatenate((v, v[::-1])))
