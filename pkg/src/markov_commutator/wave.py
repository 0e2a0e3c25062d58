"""Discrete wave equation attached to a birth-and-death kernel.

A kernel ``K`` commuting with a reversible ``P`` is encoded by the grid
``k(x, y) = K(x, y) / mu(y)`` on ``0..N`` squared.  Commutation becomes the
wave equation ``L k = k L^T`` with ``L = P - I`` acting on either
coordinate, and the row ``k(., 0) = m0 / mu`` determines the whole grid.

Triangles
---------
The certificates below work on the triangle standing on the source row,
``{(x, y) : y <= x <= N - y}``, and on its interior
``{(x, y) : y + 1 <= x <= N - y - 1}``.  From a base point ``(x0, y0)`` two
staircase paths descend to the source row: one alternates a step down with a
step left, the other a step down with a step right; both have ``2 * y0``
steps and stay in the triangle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    InternalInconsistency,
    InvalidBasePoint,
    NotBirthDeath,
    NotIrreducible,
    NotUniplicit,
    SourceNotNormalized,
    SourceNotSymmetric,
    ZeroUpRate,
)
from .kernel import DEFAULT_TOL, Tolerances, as_kernel, stationary_distribution
from .spectral import SpectralDecomposition, decompose, is_uniplicit, refined_eigenvectors, require_nonvanishing

__all__ = [
    "WaveField",
    "solve_wave_march",
    "solve_wave_spectral",
    "solve_wave",
    "wave_residual",
    "triangle",
    "inner_triangle",
    "descending_paths",
    "check_trtr_condition",
    "check_edges_condition",
    "trtr_margins",
    "min_on_triangle",
    "first_negative_on_triangle",
    "check_square_symmetries",
    "edge_sums",
    "edge_sums_min",
    "boundary_identity_residual",
    "max_identity_residual",
]


@dataclass(frozen=True, eq=False)
class WaveField:
    """Solution grid of the wave equation.

    Attributes
    ----------
    k : numpy.ndarray
        ``(N+1, N+1)`` grid, ``k[x, y]``.
    mu : numpy.ndarray
        Reversible measure of the kernel.
    source_row : numpy.ndarray
        ``k[:, 0]``.
    kernel : numpy.ndarray
        The birth-and-death kernel the field was solved for.
    """

    k: np.ndarray
    mu: np.ndarray
    source_row: np.ndarray
    kernel: np.ndarray

    @property
    def N(self) -> int:
        return self.k.shape[0] - 1


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def wave_residual(k, P) -> float:
    """``max |L k - k L^T|`` with ``L = P - I``."""
    k = np.asarray(k, dtype=float)
    L = np.asarray(P, dtype=float) - np.eye(k.shape[0])
    return float(np.max(np.abs(L @ k - k @ L.T)))


def _source_row(mu, m0=None, row0=None, tol=DEFAULT_TOL):
    if row0 is None:
        return np.asarray(m0, dtype=float) / mu
    row0 = np.asarray(row0, dtype=float)
    total = float(row0 @ mu)
    if abs(total - 1.0) > tol.tol_residual * max(1.0, float(np.max(np.abs(row0)))):
        raise SourceNotNormalized(f"sum of row0 * mu is {total!r}, not 1")
    return row0


def _mirror_invariant(M: np.ndarray, tol: Tolerances) -> bool:
    return bool(np.max(np.abs(M[::-1, ::-1] - M)) <= tol.tol_residual)


def _assemble(k: np.ndarray, mirror: bool) -> np.ndarray:
    """Keep the reliable part of a marched grid and fill the rest by symmetry.

    Entries with ``y <= x`` are reached early by the march; the others
    (``x < y``) carry round-off amplified by every division by an up-rate.
    The field is symmetric, so they are copied from ``k(y, x)``.  For mirror
    invariant kernels only the triangle ``y <= x <= N - y`` is kept and the
    rest follows from ``k(x, y) = k(N - y, N - x)`` as well.
    """
    n = k.shape[0]
    X, Y = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    out = np.where(Y <= X, k, 0.0)
    if mirror:
        far = (Y <= X) & (X + Y > n - 1)
        out[far] = k[n - 1 - Y[far], n - 1 - X[far]]
    upper = Y > X
    out[upper] = out.T[upper]
    return out


def solve_wave_march(P, row0, tol: Tolerances = DEFAULT_TOL, mu=None, unnormalized: bool = False) -> WaveField:
    """Solve the wave equation by marching in the second coordinate.

    Column ``y + 1`` follows from columns ``y - 1`` and ``y`` through the
    equation at ``(x, y)``; missing neighbours at the ends use the reflecting
    convention.  Only the part ``y <= x`` of the marched grid is kept (the
    triangle ``y <= x <= N - y`` for kernels invariant under ``x -> N - x``);
    the rest is filled from the symmetries ``k(x, y) = k(y, x)`` and
    ``k(x, y) = k(N - x, N - y)``, which every solution has.  The residual of
    the full equation is checked on the assembled grid.

    Parameters
    ----------
    P : MarkovKernel or array_like
        Irreducible birth-and-death kernel.
    row0 : array_like
        Source row ``k(., 0) = m0 / mu``.
    tol : Tolerances
    mu : array_like, optional
        Reversible measure (computed when omitted).
    unnormalized : bool
        Accept any real ``row0``, e.g. ``(0, 1, 0)``, without checking that
        ``row0 * mu`` sums to one.

    Raises
    ------
    NotBirthDeath
    ZeroUpRate
        ``P(y, y+1) == 0`` for some ``y < N``.
    NotIrreducible
    SourceNotNormalized
    """
    P = as_kernel(P, tol)
    if not P.birth_death:
        raise NotBirthDeath("the wave equation solver needs a birth-and-death kernel")
    M = P.matrix
    N = P.N
    for y in range(N):
        if M[y, y + 1] == 0:
            raise ZeroUpRate(y)
    if not P.irreducible:
        raise NotIrreducible("the wave equation solver needs an irreducible kernel")
    mu = stationary_distribution(P, tol) if mu is None else np.asarray(mu, dtype=float)
    row0 = np.asarray(row0, dtype=float)
    if row0.shape != (N + 1,):
        raise SourceNotNormalized(f"source row has shape {row0.shape}, expected ({N + 1},)")
    if not unnormalized:
        row0 = _source_row(mu, row0=row0, tol=tol)
    k = _kernels.wave_march(M, row0)
    if not np.all(np.isfinite(k)):
        raise InternalInconsistency("marched field overflowed")
    k = _assemble(k, _mirror_invariant(M, tol))
    res = wave_residual(k, M)
    if res > tol.tol_residual * max(1.0, float(np.max(np.abs(k)))):
        raise InternalInconsistency(f"marched field violates the wave equation by {res:.3e}")
    return WaveField(_frozen(k), _frozen(mu), _frozen(row0), M)


def solve_wave_spectral(d: SpectralDecomposition, m0, tol: Tolerances = DEFAULT_TOL, kernel=None) -> WaveField:
    """Wave field from the eigen-expansion
    ``k(x, y) = sum_l (m0[phi_l] / phi_l(0)) phi_l(x) phi_l(y)``.

    ``m0`` may be any real vector (``m0[phi]`` is ``sum_y m0(y) phi(y)``);
    the source row is ``m0 / mu``.  When ``kernel`` is given the basis is
    first polished in extended precision (``refined_eigenvectors``), since the
    expansion divides by ``phi_l(0)``, which can be tiny.

    Raises
    ------
    NotUniplicit
    VanishingEigenvectorAt
        Some eigenvector vanishes at 0.
    """
    if not is_uniplicit(d, tol):
        raise NotUniplicit("the spectral wave solver needs simple eigenvalues")
    require_nonvanishing(d, 0, tol)
    m0 = np.asarray(m0, dtype=float)
    if kernel is None:
        phi = d.eigenvectors
        kernel = (phi * d.eigenvalues) @ phi.T * d.mu[None, :]
    else:
        phi = refined_eigenvectors(d, kernel)
    a = (m0.astype(phi.dtype) @ phi) / phi[0]
    k = ((phi * a) @ phi.T).astype(float)
    return WaveField(_frozen(k), _frozen(d.mu), _frozen(m0 / d.mu), _frozen(np.asarray(kernel, dtype=float)))


def solve_wave(P, m0, tol: Tolerances = DEFAULT_TOL, mu=None) -> WaveField:
    """Marching solver, or the spectral one when the march fails its
    residual check (steep potentials make some up-rates tiny and the march
    divides by them)."""
    P = as_kernel(P, tol)
    mu_ = stationary_distribution(P, tol) if mu is None else np.asarray(mu, dtype=float)
    try:
        return solve_wave_march(P, np.asarray(m0, dtype=float) / mu_, tol, mu=mu_)
    except (ZeroUpRate, InternalInconsistency):
        return solve_wave_spectral(decompose(P, mu_, tol), m0, tol, kernel=P.matrix)


def triangle(N: int) -> list:
    """Points ``(x, y)`` with ``y <= x <= N - y``, ordered by ``y`` then ``x``."""
    return [(x, y) for y in range(N // 2 + 1) for x in range(y, N - y + 1)]


def inner_triangle(N: int) -> list:
    """Points ``(x, y)`` with ``y + 1 <= x <= N - y - 1``."""
    return [(x, y) for y in range(N // 2 + 1) for x in range(y + 1, N - y)]


def descending_paths(z0):
    """The two staircases from ``z0 = (x0, y0)`` down to the source row.

    Step ``n`` (counting from 0) goes down when ``n`` is even and sideways
    when odd: to the left for the first path, to the right for the second.
    """
    x0, y0 = z0
    left = [(x0, y0)]
    right = [(x0, y0)]
    for n in range(2 * y0):
        (a, b), (c, e) = left[-1], right[-1]
        if n % 2 == 0:
            left.append((a, b - 1))
            right.append((c, e - 1))
        else:
            left.append((a - 1, b))
            right.append((c + 1, e))
    return left, right


def _rates(P):
    P = as_kernel(P)
    if not P.birth_death:
        raise NotBirthDeath("the triangle conditions need a birth-and-death kernel")
    M = P.matrix
    N = P.N

    def rate(a, b):
        return M[a, b] if 0 <= a <= N and 0 <= b <= N else 0.0

    return M, N, rate


def trtr_margins(P) -> dict:
    """Slack of the two triangle conditions.

    Returns a dict with

    ``sum``
        ``min P(y-1, y) - P(x, x-1) - P(x, x+1)`` over the triangle, ``y >= 1``;
    ``max``
        the same with the larger of the two rates instead of their sum;
    ``interior``
        ``min min(P(x-1, x), P(x+1, x)) - P(y, y-1)`` over the interior,
        ``y >= 1``.

    Empty families give ``inf``.
    """
    M, N, rate = _rates(P)
    s = m = inner = np.inf
    for x, y in triangle(N):
        if y == 0:
            continue
        s = min(s, rate(y - 1, y) - rate(x, x - 1) - rate(x, x + 1))
        m = min(m, rate(y - 1, y) - max(rate(x, x - 1), rate(x, x + 1)))
    for x, y in inner_triangle(N):
        if y == 0:
            continue
        inner = min(inner, min(rate(x - 1, x), rate(x + 1, x)) - rate(y, y - 1))
    return {"sum": float(s), "max": float(m), "interior": float(inner)}


def check_trtr_condition(P, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Rate inequalities under which a non-negative source row keeps the
    field non-negative on the triangle (sum form).

    Raises
    ------
    NotBirthDeath
    """
    g = trtr_margins(P)
    return g["sum"] >= -tol.tol_residual and g["interior"] >= -tol.tol_residual


def check_edges_condition(P, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Relaxed inequalities (max form) under which edge sums stay non-negative."""
    g = trtr_margins(P)
    return g["max"] >= -tol.tol_residual and g["interior"] >= -tol.tol_residual


def _on_triangle(field: WaveField):
    pts = triangle(field.N)
    vals = np.array([field.k[x, y] for x, y in pts])
    return pts, vals


def min_on_triangle(field: WaveField):
    """Minimum of the field over the triangle and the first point (in
    ``(y, x)`` order) attaining it."""
    pts, vals = _on_triangle(field)
    i = int(np.argmin(vals))
    return float(vals[i]), pts[i]


def first_negative_on_triangle(field: WaveField, tol: Tolerances = DEFAULT_TOL):
    """First point in ``(y, x)`` order where ``k < -tol_nonneg``, or None."""
    pts, vals = _on_triangle(field)
    bad = np.flatnonzero(vals < -tol.tol_nonneg)
    return pts[int(bad[0])] if bad.size else None


def check_square_symmetries(field: WaveField, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Invariance of the field under the symmetries of the square.

    Checks ``k(x,y) = k(y,x) = k(N-x,N-y) = k(N-y,N-x)``.

    Raises
    ------
    SourceNotSymmetric
        The kernel is not invariant under ``x -> N - x``.
    """
    M = field.kernel
    if np.max(np.abs(M[::-1, ::-1] - M)) > tol.tol_residual:
        raise SourceNotSymmetric("the kernel is not invariant under x -> N - x")
    k = field.k
    bound = tol.tol_residual * max(1.0, float(np.max(np.abs(k))))
    images = (k.T, k[::-1, ::-1], k[::-1, ::-1].T)
    return all(float(np.max(np.abs(k - g))) <= bound for g in images)


def edge_sums(field: WaveField):
    """Smallest vertical and weighted horizontal edge sums on the triangle.

    Vertical: ``k(x, y) + k(x, y+1)`` with both points in the triangle.
    Horizontal: ``mu(x) k(x, y) + mu(x+1) k(x+1, y)`` with both points in
    the triangle.  Returns ``(vertical_min, horizontal_min)``; an empty
    family gives ``inf``.
    """
    N = field.N
    k, mu = field.k, field.mu
    inside = set(triangle(N))
    vert = [k[x, y] + k[x, y + 1] for x, y in inside if (x, y + 1) in inside]
    horiz = [mu[x] * k[x, y] + mu[x + 1] * k[x + 1, y] for x, y in inside if (x + 1, y) in inside]
    return (float(min(vert)) if vert else np.inf, float(min(horiz)) if horiz else np.inf)


def edge_sums_min(field: WaveField) -> float:
    """Smaller of the two edge-sum minima of :func:`edge_sums`."""
    return float(min(edge_sums(field)))


def _identity_residual(k, L, mu, z0) -> float:
    x0, y0 = z0
    left, right = descending_paths(z0)

    def w(z, zp):
        (x, y), (xp, yp) = z, zp
        if yp == y:
            return mu[x] * mu[y] * L[x, xp]
        return mu[x] * mu[y] * L[y, yp]

    lead = w(left[0], left[1])
    lhs = lead * k[left[0]]
    rhs = (lead - w(left[1], left[2]) - w(right[1], right[2])) * k[left[1]]
    end = 2 * y0
    rhs += w(left[end - 1], left[end]) * k[left[end]]
    rhs += w(right[end - 1], right[end]) * k[right[end]]
    for n in range(2, end):
        rhs += (w(left[n - 1], left[n]) - w(left[n], left[n + 1])) * k[left[n]]
        rhs += (w(right[n - 1], right[n]) - w(right[n], right[n + 1])) * k[right[n]]
    return abs(lhs - rhs) / abs(lead)


def boundary_identity_residual(field: WaveField, z0) -> float:
    """Mismatch of the summation-by-parts identity along the two staircases
    from ``z0``.

    The identity expresses ``k(z0)`` times the weight of the first step as a
    combination of the values along both staircases, with weights
    ``mu(x) mu(y) L(x, x')`` for horizontal steps and
    ``mu(x) mu(y) L(y, y')`` for vertical ones.  The returned value is the
    absolute mismatch divided by the weight of the first step, so that it
    compares with the size of ``k`` itself.

    Raises
    ------
    InvalidBasePoint
        ``z0`` is outside the triangle or on the source row.
    """
    x0, y0 = map(int, z0)
    N = field.N
    if not (1 <= y0 and y0 <= x0 <= N - y0):
        raise InvalidBasePoint(f"base point {(x0, y0)} must satisfy 1 <= y <= x <= N - y")
    L = field.kernel - np.eye(N + 1)
    return _identity_residual(field.k, L, field.mu, (x0, y0))


def max_identity_residual(field: WaveField, orientations: bool = True) -> float:
    """Largest identity residual over every base point.

    With ``orientations`` the identity is also applied to the transposed
    field, to the field reflected through ``x -> N - x`` (with the reflected
    kernel and measure) and to the reflected transpose, so that together the
    four triangles cover every grid entry.
    """
    N = field.N
    k, mu = field.k, field.mu
    L = field.kernel - np.eye(N + 1)
    cases = [(k, L, mu)]
    if orientations:
        Ls, ks, mus = L[::-1, ::-1], k[::-1, ::-1], mu[::-1]
        cases += [(k.T, L, mu), (ks, Ls, mus), (ks.T, Ls, mus)]
    worst = 0.0
    for grid, gen, m in cases:
        for z0 in triangle(N):
            if z0[1] >= 1:
                worst = max(worst, _identity_residual(grid, gen, m, z0))
    return worst
