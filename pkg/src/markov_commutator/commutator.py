"""Kernels commuting with a reversible kernel, and hypergroup certificates.

For a reversible kernel with simple spectrum, a kernel ``K`` commuting with
``P`` is diagonal in the eigenbasis of ``P`` and is therefore pinned down by a
single row.  Solving for ``K`` from its row at ``x0`` gives a direct test of
whether every probability measure can appear as that row: by convexity it is
enough to try the point masses.  The same question is asked a second way
through the sign of the triple sums of eigenvectors; :func:`check_hypergroup`
runs both and insists that they agree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    NotIrreducible,
    NotReversible,
    NotUniplicit,
    SizeLimitExceeded,
)
from .kernel import (
    DEFAULT_TOL,
    Tolerances,
    as_kernel,
    is_reversible,
    stationary_distribution,
    validate_probability,
)
from .spectral import SpectralDecomposition, decompose, is_uniplicit, require_nonvanishing, vanishing_index

__all__ = [
    "CommutatorSolution",
    "HypergroupCertificate",
    "solve_commutator",
    "point_kernel",
    "is_in_commutator",
    "commutation_residual",
    "commutator_membership_lp",
    "commutator_lp_solution",
    "hset",
    "triple_sum_min",
    "check_hypergroup",
    "check_min_weight",
    "LP_SIZE_LIMIT",
]

LP_SIZE_LIMIT = 40
# a disagreement between the two certificate routes is tolerated when both
# minima sit within this multiple of tol_nonneg of zero
BORDERLINE_FACTOR = 1e3


@dataclass(frozen=True, eq=False)
class CommutatorSolution:
    """The unique commuting matrix with a prescribed row.

    Attributes
    ----------
    K : numpy.ndarray
        Candidate kernel; rows sum to one but entries may be negative.
    coefficients : numpy.ndarray
        Eigenvalue of ``K`` on each eigenvector of ``P``.
    min_entry : float
    is_markov : bool
        ``min_entry >= -tol_nonneg``.
    """

    K: np.ndarray
    coefficients: np.ndarray
    min_entry: float
    is_markov: bool


@dataclass(frozen=True)
class HypergroupCertificate:
    """Verdict on the hypergroup property at one base point.

    ``min_triple_sum`` is the raw minimum of the triple sums and
    ``min_normalized`` the minimum after dividing each sum by the sum of the
    absolute values of its terms; the verdict of the triple-sum route uses
    the normalised value, which is insensitive to the scale of the
    eigenvectors.  ``failing_targets`` lists ``(x, min_entry)`` for every
    point mass ``delta_x`` whose commuting solution has a negative entry.
    ``argmin`` and ``argmin_normalized`` are the sorted triples attaining
    each minimum.  ``excluded_index`` is set when some eigenvector vanishes
    at the base point, in which case no sum is computed.  ``borderline`` flags a verdict
    reached after the two routes disagreed by less than the round-off band.
    """

    base_point: int
    holds: bool
    min_triple_sum: float = float("nan")
    argmin: tuple = ()
    min_normalized: float = float("nan")
    argmin_normalized: tuple = ()
    failing_targets: tuple = ()
    min_kernel_entry: float = float("nan")
    excluded_index: int | None = None
    borderline: bool = False

    def to_json(self) -> dict:
        out = {
            "base_point": self.base_point,
            "holds": self.holds,
            "min_triple_sum": None if np.isnan(self.min_triple_sum) else self.min_triple_sum,
            "argmin": list(self.argmin),
            "failing_targets": [{"x": x, "min_entry": v} for x, v in self.failing_targets],
        }
        if not np.isnan(self.min_kernel_entry):
            out["min_kernel_entry"] = self.min_kernel_entry
        if not np.isnan(self.min_normalized):
            out["min_normalized"] = self.min_normalized
            out["argmin_normalized"] = list(self.argmin_normalized)
        if self.excluded_index is not None:
            out["excluded_index"] = self.excluded_index
        if self.borderline:
            out["borderline"] = True
        return out


def _require_uniplicit(d: SpectralDecomposition, tol: Tolerances) -> None:
    if not is_uniplicit(d, tol):
        raise NotUniplicit("eigenvalues are not all simple")


def _solution(K: np.ndarray, a: np.ndarray, tol: Tolerances) -> CommutatorSolution:
    K.setflags(write=False)
    a.setflags(write=False)
    m = float(K.min())
    return CommutatorSolution(K, a, m, m >= -tol.tol_nonneg)


def solve_commutator(d: SpectralDecomposition, x0: int, m0, tol: Tolerances = DEFAULT_TOL) -> CommutatorSolution:
    """Solve ``KP = PK`` with ``K(x0, .) = m0``.

    ``K = Phi diag(a) Phi^T diag(mu)`` where ``a_l`` is the ``mu``-coordinate
    of ``m0 / mu`` along ``phi_l`` divided by ``phi_l(x0)``.

    Parameters
    ----------
    d : SpectralDecomposition
        Decomposition of ``P``; must have simple spectrum.
    x0 : int
    m0 : array_like
        Probability vector.
    tol : Tolerances

    Returns
    -------
    CommutatorSolution

    Raises
    ------
    NotUniplicit
    VanishingEigenvectorAt
    """
    _require_uniplicit(d, tol)
    require_nonvanishing(d, x0, tol)
    m0 = validate_probability(m0, d.n, tol)
    phi = d.eigenvectors
    a = (m0 @ phi) / phi[x0]
    K = (phi * a) @ phi.T * d.mu[None, :]
    return _solution(K, a, tol)


def point_kernel(d: SpectralDecomposition, x0: int, x: int, tol: Tolerances = DEFAULT_TOL) -> CommutatorSolution:
    """Kernel ``K_x(y,z) = sum_k phi_k(x) phi_k(y) phi_k(z) mu(z) / phi_k(x0)``.

    Evaluated term by term from the triple products, independently of
    :func:`solve_commutator`; the two agree when ``m0 = delta_x``.
    """
    _require_uniplicit(d, tol)
    require_nonvanishing(d, x0, tol)
    phi = d.eigenvectors
    w = phi[x] / phi[x0]
    K = np.einsum("k,yk,zk->yz", w, phi, phi) * d.mu[None, :]
    return _solution(K, np.array(w), tol)


def commutation_residual(P, K) -> float:
    """``max |KP - PK|``."""
    P = np.asarray(P, dtype=float)
    K = np.asarray(K, dtype=float)
    if P.shape != K.shape:
        raise DimensionMismatch(f"shapes {P.shape} and {K.shape} differ")
    return float(np.max(np.abs(K @ P - P @ K)))


def is_in_commutator(P, K, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``K`` is a Markov kernel with ``KP = PK`` within ``tol_residual``."""
    if np.shape(P) != np.shape(K):
        raise DimensionMismatch(f"shapes {np.shape(P)} and {np.shape(K)} differ")
    if commutation_residual(P, K) > tol.tol_residual:
        return False
    K = np.asarray(K, dtype=float)
    if K.min() < -tol.tol_nonneg:
        return False
    return bool(np.all(np.abs(K.sum(axis=1) - 1.0) <= tol.tol_residual))


def _lp_system(M: np.ndarray, x0: int, m0: np.ndarray):
    # unknowns: K flattened row-major
    n = M.shape[0]
    eye = np.eye(n)
    commute = np.kron(eye, M.T) - np.kron(M, eye)
    rows = np.kron(eye, np.ones((1, n)))
    fixed = np.zeros((n, n * n))
    fixed[np.arange(n), x0 * n + np.arange(n)] = 1.0
    A = np.vstack([commute, rows, fixed])
    b = np.concatenate([np.zeros(n * n), np.ones(n), m0])
    return A, b


def _affine_solution(A: np.ndarray, b: np.ndarray, tol: Tolerances, refine: int = 3):
    """Minimum-norm solution of ``A v = b`` and a basis of the null space of ``A``.

    The rank counts singular values above ``tol_residual`` times the largest,
    so the null space holds every kernel commuting within that tolerance.
    Residuals are re-evaluated in extended precision for a few steps of
    iterative refinement; returns ``(v, Z, residual)``.
    """
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol.tol_residual * s[0]))

    def pinv(rhs):
        return Vt[:r].T @ ((U[:, :r].T @ rhs) / s[:r])

    Al, bl = A.astype(np.longdouble), b.astype(np.longdouble)
    v = pinv(b)
    for _ in range(refine):
        v = v + pinv((bl - Al @ v.astype(np.longdouble)).astype(float))
    res = float(np.max(np.abs(bl - Al @ v.astype(np.longdouble))))
    return v, Vt[r:].T, res


def commutator_lp_solution(P, x0: int, m0, tol: Tolerances = DEFAULT_TOL):
    """Feasibility of ``{K >= 0, K 1 = 1, KP = PK, K(x0,.) = m0}``.

    The equality constraints are solved first: ``K = K_p + Z w`` with
    ``K_p`` a particular solution and the columns of ``Z`` spanning the
    remaining freedom.  A dense phase-I simplex then decides whether some
    ``w`` gives ``K_p + Z w >= -tol_nonneg / 2``; it is feasible when the
    artificial objective ends at or below ``tol_nonneg / 4``, so the kernel
    returned is non-negative to within ``tol_nonneg``.  Working in
    these coordinates leaves no redundant rows for the simplex to pivot on,
    and the shift keeps exact zeros of ``K`` off degenerate vertices.

    Returns
    -------
    (bool, numpy.ndarray or None)
        Verdict and, when feasible, the kernel found.

    Raises
    ------
    SizeLimitExceeded
        More than ``LP_SIZE_LIMIT`` states.
    InternalInconsistency
        The simplex stopped early, or the kernel it found fails the
        original constraints.
    """
    P = as_kernel(P, tol)
    n = P.n
    if n > LP_SIZE_LIMIT:
        raise SizeLimitExceeded(f"LP route limited to {LP_SIZE_LIMIT} states, got {n}")
    m0 = validate_probability(m0, n, tol)
    A, b = _lp_system(P.matrix, x0, m0)
    Kp, Z, res = _affine_solution(A, b, tol)
    if res > tol.tol_residual:
        return False, None
    half = 0.5 * tol.tol_nonneg
    h = -Kp - half
    free = np.max(np.abs(Z), axis=1, initial=0.0) > 1e-14
    if np.any(h[~free] > 0.0):
        return False, None
    p = Z.shape[1]
    if p == 0:
        K = Kp
    else:
        # G (w+ - w-) - s = h with w+, w-, s >= 0
        G, h = Z[free], h[free]
        m = G.shape[0]
        lhs = np.hstack([G, -G, -np.eye(m)])
        rhs = h.copy()
        flip = rhs < 0
        lhs[flip] *= -1.0
        rhs[flip] *= -1.0
        value, x, status, _ = _kernels.phase1(lhs, rhs)
        if status != 0:
            raise InternalInconsistency(f"phase-I simplex stopped with status {status}")
        if value > 0.5 * half:
            return False, None
        K = Kp + Z @ (x[:p] - x[p:2 * p])
    K = K.reshape(n, n)
    # a feasible verdict must survive substitution into the original system
    defect = max(float(np.max(np.abs(A @ K.ravel() - b))) - tol.tol_residual, -float(K.min()) - tol.tol_nonneg)
    if defect > 0.0:
        raise InternalInconsistency(f"kernel from the simplex violates its constraints by {defect:.1e}")
    return True, K


def commutator_membership_lp(P, x0: int, m0, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether some Markov kernel commuting with ``P`` has row ``m0`` at ``x0``."""
    return commutator_lp_solution(P, x0, m0, tol)[0]


def triple_sum_min(d: SpectralDecomposition, x0: int, tol: Tolerances = DEFAULT_TOL):
    """Smallest triple sum ``sum_k phi_k(x) phi_k(y) phi_k(z) / phi_k(x0)``.

    The sum is symmetric in ``(x, y, z)``, so only sorted triples are
    visited; the argmin is the lexicographically first sorted minimiser.

    Returns
    -------
    (float, (int, int, int))

    Raises
    ------
    VanishingEigenvectorAt
    """
    require_nonvanishing(d, x0, tol)
    raw, arg, _, _ = _kernels.triple_sum_min(d.eigenvectors, 1.0 / d.eigenvectors[x0])
    return raw, arg


def _check_spectral(P, tol, mu):
    P = as_kernel(P, tol)
    if not P.irreducible:
        raise NotIrreducible("hypergroup analysis requires an irreducible kernel")
    mu = stationary_distribution(P, tol) if mu is None else np.asarray(mu, dtype=float)
    if not is_reversible(P.matrix, mu, tol):
        raise NotReversible("hypergroup analysis requires a reversible kernel")
    return P, mu


def hset(P, tol: Tolerances = DEFAULT_TOL, mu=None, d: SpectralDecomposition | None = None) -> frozenset:
    """Points ``x0`` at which every probability measure is the row of some
    Markov kernel commuting with ``P``.

    With simple spectrum, ``x0`` qualifies iff every point mass yields a
    non-negative solution and no eigenvector vanishes at ``x0``.  Otherwise
    each pair ``(x0, delta_x)`` is decided by the linear program.

    Raises
    ------
    NotIrreducible
    NotReversible
    """
    P, mu = _check_spectral(P, tol, mu)
    n = P.n
    if d is None:
        d = decompose(P, mu, tol)
    eye = np.eye(n)
    out = set()
    if is_uniplicit(d, tol):
        for x0 in range(n):
            if vanishing_index(d, x0, tol) is not None:
                continue
            if all(solve_commutator(d, x0, eye[x], tol).is_markov for x in range(n)):
                out.add(x0)
    else:
        for x0 in range(n):
            if all(x == x0 or commutator_membership_lp(P, x0, eye[x], tol) for x in range(n)):
                out.add(x0)
    return frozenset(out)


def check_hypergroup(P, x0: int, tol: Tolerances = DEFAULT_TOL, mu=None,
                     d: SpectralDecomposition | None = None) -> HypergroupCertificate:
    """Certify or refute the hypergroup property of ``P`` at ``x0``.

    Two routes are evaluated: the sign of the triple sums of eigenvectors
    (normalised by the absolute sum of their terms) and the minimum entry of
    the commuting solutions for every point mass.  When they disagree and
    both minima lie within ``1e3 * tol_nonneg`` of zero, the kernel route
    decides and the certificate is flagged ``borderline``; any larger
    disagreement is an internal error.

    Raises
    ------
    NotUniplicit
    InternalInconsistency
    """
    P, mu = _check_spectral(P, tol, mu)
    if d is None:
        d = decompose(P, mu, tol)
    _require_uniplicit(d, tol)
    l = vanishing_index(d, x0, tol)
    if l is not None:
        return HypergroupCertificate(base_point=x0, holds=False, excluded_index=l)

    phi = d.eigenvectors
    raw, arg, norm, arg_norm = _kernels.triple_sum_min(phi, 1.0 / phi[x0])
    sums_ok = norm >= -tol.tol_nonneg

    eye = np.eye(P.n)
    failing = []
    kmin = np.inf
    for x in range(P.n):
        sol = solve_commutator(d, x0, eye[x], tol)
        kmin = min(kmin, sol.min_entry)
        if not sol.is_markov:
            failing.append((x, sol.min_entry))
    kernels_ok = not failing

    borderline = False
    if sums_ok != kernels_ok:
        band = -BORDERLINE_FACTOR * tol.tol_nonneg
        if norm >= band and kmin >= band:
            borderline = True
        else:
            raise InternalInconsistency(
                f"triple sums ({norm:.3e}) and commuting kernels ({kmin:.3e}) disagree at base point {x0}")
    return HypergroupCertificate(
        base_point=x0,
        holds=kernels_ok,
        min_triple_sum=raw,
        argmin=arg,
        min_normalized=norm,
        argmin_normalized=arg_norm,
        failing_targets=tuple(failing),
        min_kernel_entry=float(kmin),
        borderline=borderline,
    )


def check_min_weight(P, hset_result, tol: Tolerances = DEFAULT_TOL, mu=None) -> bool:
    """Whether every point of ``hset_result`` carries the smallest stationary weight."""
    P = as_kernel(P, tol)
    if mu is None:
        mu = stationary_distribution(P, tol)
    mu = np.asarray(mu, dtype=float)
    floor = mu.min()
    return all(mu[x] <= floor + tol.tol_residual for x in hset_result)

