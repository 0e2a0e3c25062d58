"""Markov links between two state spaces and their weighted adjoints.

A link is a row-stochastic ``n_bar x n`` matrix.  Given a positive measure
``mu_bar`` on the large space, its adjoint ``L*`` maps functions back with
``L*(x, xb) = mu_bar(xb) L(xb, x) / mu(x)`` where ``mu = mu_bar L``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateImageMeasure,
    DimensionMismatch,
    HypConditionViolated,
    NonPositiveMeasure,
    NotReversible,
    NotSurjective,
    ValidationError,
)
from .kernel import DEFAULT_TOL, MarkovKernel, Tolerances, is_reversible, validate_kernel

__all__ = [
    "Link",
    "make_link",
    "deterministic_link",
    "dual_link",
    "image_measure",
    "check_intertwining",
    "check_hyp_condition",
    "induced_kernel",
    "conjugate_commutator",
    "initial_hyp_residual",
]


@dataclass(frozen=True, eq=False)
class Link:
    """Row-stochastic rectangular matrix from ``n_bar`` to ``n`` states."""

    matrix: np.ndarray
    deterministic: bool

    @property
    def n_bar(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def to_json(self) -> dict:
        return {"n_bar": self.n_bar, "n": self.n, "rows": self.matrix.tolist(),
                "deterministic": self.deterministic}


def make_link(rows, tol: Tolerances = DEFAULT_TOL) -> Link:
    """Validate a rectangular stochastic matrix."""
    M = np.array(rows, dtype=float)
    if M.ndim != 2 or min(M.shape) < 1:
        raise DimensionMismatch(f"a link needs a non-empty matrix, got shape {M.shape}")
    if np.any(M < -tol.tol_stochastic):
        raise ValidationError("link has negative entries")
    M[M < 0] = 0.0
    if np.any(np.abs(M.sum(axis=1) - 1.0) > tol.tol_stochastic):
        raise ValidationError("link rows must sum to 1")
    M /= M.sum(axis=1, keepdims=True)
    M.setflags(write=False)
    deterministic = bool(np.all(np.sum(M > 0, axis=1) == 1))
    return Link(M, deterministic)


def deterministic_link(pi, n: int | None = None) -> Link:
    """Link with row ``xb`` carrying all its mass at ``pi[xb]``.

    Raises
    ------
    NotSurjective
        Some target state is not hit.
    """
    pi = np.asarray(pi, dtype=int).ravel()
    if n is None:
        n = int(pi.max()) + 1 if pi.size else 0
    if pi.size == 0 or pi.min() < 0 or pi.max() >= n:
        raise NotSurjective("projection values must lie in 0..n-1")
    hit = np.zeros(n, dtype=bool)
    hit[pi] = True
    if not hit.all():
        raise NotSurjective(f"states {np.flatnonzero(~hit).tolist()} have no preimage")
    M = np.zeros((pi.size, n))
    M[np.arange(pi.size), pi] = 1.0
    M.setflags(write=False)
    return Link(M, True)


def image_measure(L: Link, mu_bar) -> np.ndarray:
    """``mu_bar L``."""
    return np.asarray(mu_bar, dtype=float) @ L.matrix


def dual_link(L: Link, mu_bar, tol: Tolerances = DEFAULT_TOL) -> Link:
    """Adjoint link ``L*(x, xb) = mu_bar(xb) L(xb, x) / mu(x)``.

    Raises
    ------
    NonPositiveMeasure
        ``mu_bar`` has a non-positive entry.
    DegenerateImageMeasure
        ``mu_bar L`` vanishes somewhere.
    """
    mu_bar = np.asarray(mu_bar, dtype=float)
    if mu_bar.shape != (L.n_bar,):
        raise DimensionMismatch("measure and link sizes differ")
    if not np.all(mu_bar > 0):
        raise NonPositiveMeasure("mu_bar must be positive")
    mu = mu_bar @ L.matrix
    zero = np.flatnonzero(mu <= 0)
    if zero.size:
        raise DegenerateImageMeasure(zero[0])
    D = (L.matrix * mu_bar[:, None]).T / mu[:, None]
    return make_link(D, tol.replace(tol_stochastic=max(tol.tol_stochastic, 1e-12)))


def _shape_check(Pbar, L: Link, P=None):
    Pbar = np.asarray(Pbar, dtype=float)
    if Pbar.shape != (L.n_bar, L.n_bar):
        raise DimensionMismatch(f"kernel of shape {Pbar.shape} does not fit a link from {L.n_bar} states")
    if P is not None:
        P = np.asarray(P, dtype=float)
        if P.shape != (L.n, L.n):
            raise DimensionMismatch(f"kernel of shape {P.shape} does not fit a link to {L.n} states")
    return Pbar, P


def check_intertwining(Pbar, L: Link, P) -> float:
    """``max |Pbar L - L P|``."""
    Pbar, P = _shape_check(Pbar, L, P)
    return float(np.max(np.abs(Pbar @ L.matrix - L.matrix @ P)))


def check_hyp_condition(Pbar, L: Link, mu_bar, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest residual of ``L L* Pbar L = Pbar L`` and ``L L* L = L``."""
    Pbar, _ = _shape_check(Pbar, L)
    A = L.matrix
    D = dual_link(L, mu_bar, tol).matrix
    proj = A @ D
    r1 = np.max(np.abs(proj @ Pbar @ A - Pbar @ A))
    r2 = np.max(np.abs(proj @ A - A))
    return float(max(r1, r2))


def induced_kernel(Pbar, L: Link, mu_bar, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """``L* Pbar L``, the kernel seen on the small space."""
    Pbar, _ = _shape_check(Pbar, L)
    D = dual_link(L, mu_bar, tol).matrix
    return validate_kernel(D @ Pbar @ L.matrix, tol.replace(tol_stochastic=max(tol.tol_stochastic, 1e-11)))


def conjugate_commutator(L: Link, Kbar, mu_bar, tol: Tolerances = DEFAULT_TOL, Pbar=None) -> MarkovKernel:
    """Push a kernel on the large space down to ``L* Kbar L``.

    When ``Pbar`` is given it must be reversible for ``mu_bar`` and satisfy
    the compatibility identities of :func:`check_hyp_condition`; then
    ``L* Kbar L`` commutes with ``L* Pbar L`` whenever ``Kbar`` commutes
    with ``Pbar``.

    Raises
    ------
    NotReversible
    HypConditionViolated
    """
    Kbar, _ = _shape_check(Kbar, L)
    if Pbar is not None:
        Pbar, _ = _shape_check(Pbar, L)
        if not is_reversible(Pbar, mu_bar, tol):
            raise NotReversible("Pbar is not reversible with respect to mu_bar")
        r = check_hyp_condition(Pbar, L, mu_bar, tol)
        if r > tol.tol_residual:
            raise HypConditionViolated(f"compatibility residual {r:.3e} exceeds {tol.tol_residual:.1e}")
    D = dual_link(L, mu_bar, tol).matrix
    return validate_kernel(D @ Kbar @ L.matrix, tol.replace(tol_stochastic=max(tol.tol_stochastic, 1e-11)))


def initial_hyp_residual(m_bar0, L: Link, mu_bar, tol: Tolerances = DEFAULT_TOL) -> float:
    """``max |m_bar0 L L* - m_bar0|`` for an initial law on the large space."""
    m = np.asarray(m_bar0, dtype=float)
    D = dual_link(L, mu_bar, tol).matrix
    return float(np.max(np.abs(m @ L.matrix @ D - m)))
