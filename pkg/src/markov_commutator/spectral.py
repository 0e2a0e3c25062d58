"""Orthonormal eigenbases of reversible kernels in the weighted space L2(mu)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, NonPositiveMeasure, NotReversible, VanishingEigenvectorAt
from .kernel import DEFAULT_TOL, MarkovKernel, Tolerances, as_kernel, is_reversible, stationary_distribution, validate_kernel

__all__ = [
    "SpectralDecomposition",
    "decompose",
    "is_uniplicit",
    "reconstruct",
    "orthonormality_residual",
    "eigen_residual",
    "vanishing_index",
    "refined_eigenvectors",
]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-decomposition ``P = Phi diag(theta) Phi^T diag(mu)``.

    Attributes
    ----------
    mu : numpy.ndarray
        Positive reversible measure.
    eigenvalues : numpy.ndarray
        Sorted in decreasing order, first entry exactly 1.
    eigenvectors : numpy.ndarray
        Column ``l`` is the eigenvector for ``eigenvalues[l]``; columns are
        orthonormal for the inner product weighted by ``mu`` and column 0 is
        the constant vector.
    simple : bool
        Spectrum known to be simple for structural reasons (irreducible
        birth-and-death kernels), independently of the computed gaps.
    """

    mu: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    simple: bool = False

    @property
    def n(self) -> int:
        return self.mu.shape[0]

    def to_json(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.T.tolist(),
            "mu": self.mu.tolist(),
            "simple": self.simple,
        }


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


# reflection invariance is trusted when the mirrored matrix agrees to this
# many ulps of its largest entry
_MIRROR_ULPS = 64


def _mirror_basis(n: int) -> tuple:
    """Orthogonal basis of even then odd vectors under ``x -> n-1-x``."""
    Q = np.zeros((n, n))
    h = n // 2
    r = np.sqrt(0.5)
    for i in range(h):
        Q[i, i] = Q[n - 1 - i, i] = r
    if n % 2:
        Q[h, h] = 1.0
    n_even = h + n % 2
    for i in range(h):
        Q[i, n_even + i] = r
        Q[n - 1 - i, n_even + i] = -r
    return Q, n_even


def _eigh(S: np.ndarray, tol: Tolerances):
    target = 1e-14 * max(1.0, float(np.linalg.norm(S)))
    w, W, off, _ = _kernels.jacobi_eigh(np.ascontiguousarray(S), tol=target, max_sweeps=100)
    if off > tol.tol_residual:
        raise ConvergenceError(f"Jacobi sweeps stopped with off-diagonal norm {off:.3e}")
    return w, W


def _symmetric_eigh(S: np.ndarray, tol: Tolerances):
    """Jacobi on ``S``, split into even and odd blocks when ``S`` is mirror
    invariant so that nearly equal even/odd pairs cannot mix."""
    n = S.shape[0]
    J = S[::-1, ::-1]
    if n < 2 or np.max(np.abs(J - S)) > _MIRROR_ULPS * np.finfo(float).eps * np.max(np.abs(S)):
        return _eigh(S, tol)
    Q, ne = _mirror_basis(n)
    B = Q.T @ (0.5 * (S + J)) @ Q
    we, We = _eigh(0.5 * (B[:ne, :ne] + B[:ne, :ne].T), tol)
    parts_w, parts_W = [we], [Q[:, :ne] @ We]
    if ne < n:
        wo, Wo = _eigh(0.5 * (B[ne:, ne:] + B[ne:, ne:].T), tol)
        parts_w.append(wo)
        parts_W.append(Q[:, ne:] @ Wo)
    return np.concatenate(parts_w), np.hstack(parts_W)


def decompose(P, mu=None, tol: Tolerances = DEFAULT_TOL) -> SpectralDecomposition:
    """Diagonalise a reversible kernel.

    The kernel is symmetrised as ``S = D^(1/2) P D^(-1/2)`` with
    ``D = diag(mu)`` and handed to a cyclic Jacobi solver; eigenvectors are
    mapped back by ``D^(-1/2)``.  Mirror-invariant kernels are solved on
    their even and odd subspaces separately.  Inside the eigenvalue-1 cluster the basis
    is rotated so that the first vector is exactly the constant one, and each
    remaining column is signed so that its first clearly nonzero entry is
    positive.

    Parameters
    ----------
    P : MarkovKernel or array_like
    mu : array_like, optional
        Reversible measure; computed from ``P`` when omitted (``P`` must then
        be irreducible).
    tol : Tolerances

    Returns
    -------
    SpectralDecomposition

    Raises
    ------
    NonPositiveMeasure
        Some ``mu(x) <= 0``.
    NotReversible
        Detailed balance fails by more than ``tol_residual``.
    ConvergenceError
        Jacobi sweeps stalled above ``tol_residual``.
    """
    P = as_kernel(P, tol)
    M = P.matrix
    n = P.n
    mu = stationary_distribution(P, tol) if mu is None else np.asarray(mu, dtype=float)
    if mu.shape != (n,) or not np.all(mu > 0):
        raise NonPositiveMeasure("the reference measure must be positive")
    mu = mu / mu.sum()
    if not is_reversible(M, mu, tol):
        raise NotReversible("kernel is not reversible with respect to the given measure")

    root = np.sqrt(mu)
    S = root[:, None] * M / root[None, :]
    S = 0.5 * (S + S.T)
    w, W = _symmetric_eigh(S, tol)

    order = np.argsort(-w, kind="stable")
    w = np.clip(w[order], -1.0, 1.0)
    W = W[:, order]

    cluster = np.flatnonzero(w >= 1.0 - tol.tol_eig_gap)
    if cluster.size == 0:
        raise ConvergenceError("no eigenvalue close to 1 found")
    Wc = W[:, cluster]
    c = Wc.T @ root
    c /= np.linalg.norm(c)
    v = c.copy()
    v[0] -= 1.0
    if np.linalg.norm(v) > 1e-15:
        Q = np.eye(cluster.size) - 2.0 * np.outer(v, v) / (v @ v)
        Wc = Wc @ Q
    Wc[:, 0] = root
    W[:, cluster] = Wc
    w[cluster[0]] = 1.0

    phi = W / root[:, None]
    phi /= np.sqrt((phi ** 2 * mu[:, None]).sum(axis=0))[None, :]
    phi[:, 0] = 1.0
    for l in range(1, n):
        col = phi[:, l]
        scale = np.max(np.abs(col))
        first = np.flatnonzero(np.abs(col) > 1e-8 * scale)[0]
        if col[first] < 0:
            phi[:, l] = -col
    simple = P.irreducible and P.birth_death
    return SpectralDecomposition(_readonly(mu), _readonly(w), _readonly(phi), simple)


# refinement sweeps run in extended precision up to this many states
_REFINE_MAX_STATES = 128


def _parity(V: np.ndarray) -> np.ndarray:
    """+1 / -1 for columns that are even / odd under ``x -> n-1-x``, else 0."""
    out = np.zeros(V.shape[1], dtype=int)
    for j in range(V.shape[1]):
        v = np.asarray(V[:, j], dtype=float)
        scale = 1e-10 * np.max(np.abs(v))
        if np.max(np.abs(v - v[::-1])) <= scale:
            out[j] = 1
        elif np.max(np.abs(v + v[::-1])) <= scale:
            out[j] = -1
    return out


def refined_eigenvectors(d: SpectralDecomposition, P, sweeps: int = 3) -> np.ndarray:
    """Eigenvectors of ``P`` polished by Jacobi sweeps in ``numpy.longdouble``.

    Starting from ``d``, the symmetrised kernel is rebuilt in extended
    precision and rotated into the computed basis; the few remaining
    off-diagonal entries are removed by ordinary Jacobi rotations.  Small
    entries of the basis (those near a state of tiny mass) gain several digits
    of relative accuracy, which matters for expansions that divide by them.
    Columns of opposite mirror parity are never rotated into each other.
    Where ``longdouble`` is plain double the result is just ``d``'s basis.

    Returns
    -------
    numpy.ndarray
        ``longdouble`` array shaped like ``d.eigenvectors``.
    """
    LD = np.longdouble
    phi = np.asarray(d.eigenvectors, dtype=LD)
    n = d.n
    if n > _REFINE_MAX_STATES or np.finfo(LD).eps >= np.finfo(float).eps:
        return phi
    r = np.sqrt(np.asarray(d.mu, dtype=LD))
    S = r[:, None] * np.asarray(P, dtype=LD) / r[None, :]
    S = (S + S.T) / 2
    V = phi * r[:, None]
    for j in range(n):
        for i in range(j):
            V[:, j] -= (V[:, i] @ V[:, j]) * V[:, i]
        V[:, j] /= np.sqrt(V[:, j] @ V[:, j])
    parity = _parity(V)
    A = V.T @ S @ V
    eps = np.finfo(LD).eps
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if parity[p] * parity[q] < 0 or abs(apq) <= eps * (abs(A[p, p]) + abs(A[q, q])) * 1e-3:
                    continue
                rotated = True
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = (1 if theta >= 0 else -1) / (abs(theta) + np.sqrt(1 + theta * theta))
                c = 1 / np.sqrt(1 + t * t)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * cp - s * cq, s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * rp - s * rq, s * rp + c * rq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    out = V / r[:, None]
    # keep the sign convention of d
    flip = np.sum(out * phi * np.asarray(d.mu, dtype=LD)[:, None], axis=0) < 0
    out[:, flip] *= -1
    return out


def is_uniplicit(d: SpectralDecomposition, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether the spectrum is simple.

    Irreducible birth-and-death kernels always have simple spectrum; for
    other kernels every eigenvalue gap must exceed ``tol_eig_gap``.
    """
    if d.n == 1 or d.simple:
        return True
    return bool(np.min(-np.diff(d.eigenvalues)) > tol.tol_eig_gap)


def reconstruct(d: SpectralDecomposition, tol: Tolerances = DEFAULT_TOL) -> MarkovKernel:
    """Rebuild ``P(x,y) = sum_l theta_l phi_l(x) phi_l(y) mu(y)``."""
    phi = d.eigenvectors
    M = (phi * d.eigenvalues) @ phi.T * d.mu[None, :]
    loose = tol.replace(tol_stochastic=max(tol.tol_stochastic, tol.tol_residual))
    return validate_kernel(M, loose)


def orthonormality_residual(d: SpectralDecomposition) -> float:
    """``max |Phi^T diag(mu) Phi - I|``."""
    phi = d.eigenvectors
    G = phi.T @ (phi * d.mu[:, None])
    return float(np.max(np.abs(G - np.eye(d.n))))


def eigen_residual(d: SpectralDecomposition, P) -> float:
    """``max |P Phi - Phi diag(theta)|``."""
    M = np.asarray(P, dtype=float)
    phi = d.eigenvectors
    return float(np.max(np.abs(M @ phi - phi * d.eigenvalues)))


def vanishing_index(d: SpectralDecomposition, x0: int, tol: Tolerances = DEFAULT_TOL) -> int | None:
    """First eigenvector index ``l`` with ``|phi_l(x0)| <= tol_eig_gap``, or None."""
    small = np.flatnonzero(np.abs(d.eigenvectors[x0]) <= tol.tol_eig_gap)
    return int(small[0]) if small.size else None


def require_nonvanishing(d: SpectralDecomposition, x0: int, tol: Tolerances = DEFAULT_TOL) -> None:
    """Raise :class:`VanishingEigenvectorAt` if some ``phi_l(x0)`` is negligible."""
    l = vanishing_index(d, x0, tol)
    if l is not None:
        raise VanishingEigenvectorAt(x0, l)
