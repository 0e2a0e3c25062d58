"""Validated Markov kernels, invariant measures and structural predicates."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NotIrreducible,
    ParseError,
    RowSumViolation,
    ValidationError,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "MarkovKernel",
    "validate_kernel",
    "as_kernel",
    "validate_probability",
    "is_irreducible",
    "stationary_distribution",
    "is_reversible",
    "is_birth_death",
    "separation_discrepancy",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module.

    Attributes
    ----------
    tol_stochastic : float
        Allowed deviation of a row sum from one.
    tol_nonneg : float
        Entries above ``-tol_nonneg`` count as non-negative.
    tol_eig_gap : float
        Eigenvalue gaps at or below this are treated as multiplicities.
    tol_residual : float
        Bound on identity residuals (commutation, reversibility, ...).
    """

    tol_stochastic: float = 1e-12
    tol_nonneg: float = 1e-9
    tol_eig_gap: float = 1e-8
    tol_residual: float = 1e-10

    def __post_init__(self):
        for name in ("tol_stochastic", "tol_nonneg", "tol_eig_gap", "tol_residual"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive number, got {value!r}")

    def replace(self, **changes) -> "Tolerances":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update({k: v for k, v in changes.items() if v is not None})
        return Tolerances(**values)


DEFAULT_TOL = Tolerances()


def _as_float_array(raw, what: str) -> np.ndarray:
    try:
        return np.array(raw, dtype=float, copy=True)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} is not a rectangular array of numbers") from exc


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    """Dense row-stochastic matrix with precomputed structure flags.

    Instances are produced by :func:`validate_kernel`; the matrix is stored
    read-only so a kernel can be shared between threads.
    """

    matrix: np.ndarray
    irreducible: bool
    birth_death: bool

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        """Right endpoint when the states are read as ``0..N``."""
        return self.matrix.shape[0] - 1

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def __getitem__(self, idx):
        return self.matrix[idx]

    def to_json(self) -> dict:
        return {"n": self.n, "rows": self.matrix.tolist()}


def _support_reach(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in np.flatnonzero(adj[x] & ~seen):
            seen[y] = True
            queue.append(y)
    return seen


def _irreducible(M: np.ndarray) -> bool:
    adj = M > 0
    return bool(_support_reach(adj, 0).all() and _support_reach(adj.T, 0).all())


def _birth_death(M: np.ndarray) -> bool:
    n = M.shape[0]
    i, j = np.nonzero(M > 0)
    return bool(np.all(np.abs(i - j) <= 1)) if n else True


def validate_kernel(raw, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """Check that ``raw`` is a Markov kernel and compute its structure flags.

    Entries in ``[-tol_stochastic, 0)`` are treated as rounding noise and set
    to zero; rows are renormalised when their sum is within
    ``tol_stochastic`` of one.

    Parameters
    ----------
    raw : array_like
        Square real matrix.
    tol : Tolerances

    Returns
    -------
    MarkovKernel

    Raises
    ------
    NegativeEntry
        An entry is below ``-tol_stochastic``.
    RowSumViolation
        A row sum differs from one by more than ``tol_stochastic``.
    """
    if isinstance(raw, MarkovKernel):
        return raw
    M = _as_float_array(raw, "kernel")
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("kernel contains non-finite entries")
    neg = np.argwhere(M < -tol.tol_stochastic)
    if neg.size:
        x, y = neg[0]
        raise NegativeEntry(x, y, M[x, y])
    M[M < 0] = 0.0
    sums = M.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol.tol_stochastic)
    if bad.size:
        raise RowSumViolation(bad[0], sums[bad[0]])
    M /= sums[:, None]
    M.setflags(write=False)
    return MarkovKernel(M, _irreducible(M), _birth_death(M))


def as_kernel(P, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """Return ``P`` unchanged if already validated, else validate it."""
    return P if isinstance(P, MarkovKernel) else validate_kernel(P, tol)


def validate_probability(weights, n: int | None = None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Check a probability vector and return it as a float array.

    Raises
    ------
    DimensionMismatch
        Length differs from ``n``.
    ValidationError
        Negative entries or a sum away from one.
    """
    w = _as_float_array(weights, "probability vector").ravel()
    if n is not None and w.size != n:
        raise DimensionMismatch(f"probability vector has length {w.size}, expected {n}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("probability vector contains non-finite entries")
    if np.any(w < -tol.tol_stochastic):
        raise ValidationError(f"probability vector has negative entry {w.min():.3e}")
    w[w < 0] = 0.0
    total = w.sum()
    if abs(total - 1.0) > tol.tol_stochastic:
        raise ValidationError(f"probability vector sums to {float(total)!r}, not 1")
    return w / total


def is_irreducible(P) -> bool:
    """Whether every state reaches every other along the support digraph.

    Two breadth-first searches from state 0 (on the graph and on its
    reverse) replace the sum of matrix powers.
    """
    if isinstance(P, MarkovKernel):
        return P.irreducible
    return _irreducible(np.asarray(P, dtype=float))


def is_birth_death(P) -> bool:
    """Whether the support of ``P`` is tridiagonal."""
    if isinstance(P, MarkovKernel):
        return P.birth_death
    return _birth_death(np.asarray(P, dtype=float))


def _gth(M: np.ndarray) -> np.ndarray:
    # Grassmann-Taksar-Heyman elimination: subtraction free, so small
    # stationary weights keep full relative accuracy.
    A = np.array(M, dtype=float, copy=True)
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        s = A[k, :k].sum()
        A[:k, k] /= s
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ A[:k, k]
    return pi / pi.sum()


def stationary_distribution(P, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Invariant probability of an irreducible kernel.

    Parameters
    ----------
    P : MarkovKernel or array_like
    tol : Tolerances

    Returns
    -------
    numpy.ndarray
        Positive vector ``mu`` with ``mu @ P == mu`` and unit sum.

    Raises
    ------
    NotIrreducible
    """
    P = as_kernel(P, tol)
    if not P.irreducible:
        raise NotIrreducible("stationary distribution requires an irreducible kernel")
    return _gth(P.matrix)


def is_reversible(P, mu, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Detailed balance ``mu(x) P(x,y) == mu(y) P(y,x)`` within ``tol_residual``."""
    M = np.asarray(P, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (M.shape[0],):
        raise DimensionMismatch("measure and kernel sizes differ")
    flux = mu[:, None] * M
    return bool(np.max(np.abs(flux - flux.T)) <= tol.tol_residual)


def separation_discrepancy(m, mu) -> float:
    """``sup_x 1 - m(x)/mu(x)`` with ``r/0 = inf`` for ``r > 0`` and ``0/0 = 0``.

    Examples
    --------
    >>> separation_discrepancy([0.5, 0.5], [0.25, 0.75])  # doctest: +ELLIPSIS
    0.333...
    """
    m = np.asarray(m, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if m.shape != mu.shape:
        raise DimensionMismatch("measures have different lengths")
    ratio = np.empty_like(m)
    pos = mu > 0
    ratio[pos] = m[pos] / mu[pos]
    ratio[~pos] = np.where(m[~pos] > 0, np.inf, 0.0)
    return float(max(0.0, np.max(1.0 - ratio)))
