"""Hot numeric loops, each in two flavours.

Every kernel exists as a plain loop compiled with ``numba.njit`` and as a
vectorised numpy routine.  The module-level names without suffix point at the
numba versions unless ``MARKOV_COMMUTATOR_DISABLE_NUMBA`` is set to a truthy
value (or numba cannot be imported), in which case they point at the numpy
versions.  Both flavours are always importable under explicit names
(``*_numba`` / ``*_numpy``) so that tests and benchmarks can compare them.
"""
import os

import numpy as np

_FLAG = os.environ.get("MARKOV_COMMUTATOR_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")

if not HAVE_NUMBA:  # pragma: no cover

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# cyclic Jacobi eigensolver for symmetric matrices
# ---------------------------------------------------------------------------

@njit(cache=True)
def _jacobi_eigh_numba(S, tol, max_sweeps):
    n = S.shape[0]
    A = S.copy()
    V = np.eye(n)
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        off = np.sqrt(off)
        if off <= tol:
            break
        if sweep == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                g = 100.0 * abs(apq)
                if sweep > 3 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    return w, V, off, sweeps


def _jacobi_eigh_numpy(S, tol, max_sweeps):
    A = np.array(S, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    sweeps = 0
    off = 0.0
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        off = float(np.sqrt(2.0 * np.sum(A[iu] ** 2)))
        if off <= tol or sweep == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                g = 100.0 * abs(apq)
                if sweep > 3 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp, colq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp, rowq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V, off, sweeps


def _jacobi_entry(impl):
    def jacobi_eigh(S, tol=1e-14, max_sweeps=100):
        S = np.ascontiguousarray(S, dtype=float)
        return impl(S, float(tol), int(max_sweeps))

    jacobi_eigh.__doc__ = """Eigen-decompose a real symmetric matrix by cyclic Jacobi sweeps.

    Returns ``(eigenvalues, eigenvectors, off_norm, sweeps)``; eigenvalues are
    unsorted, eigenvector ``i`` is column ``i``, ``off_norm`` is the final
    off-diagonal Frobenius norm.
    """
    return jacobi_eigh


jacobi_eigh_numba = _jacobi_entry(_jacobi_eigh_numba)
jacobi_eigh_numpy = _jacobi_entry(_jacobi_eigh_numpy)


# ---------------------------------------------------------------------------
# triple sums  sum_k phi_k(x) phi_k(y) phi_k(z) / phi_k(x0)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _triple_sum_min_numba(phi, inv0):
    n, m = phi.shape
    best_raw = np.inf
    best_norm = np.inf
    arg_raw = np.zeros(3, dtype=np.int64)
    arg_norm = np.zeros(3, dtype=np.int64)
    for x in range(n):
        for y in range(x, n):
            for z in range(y, n):
                s = 0.0
                b = 0.0
                for k in range(m):
                    t = phi[x, k] * phi[y, k] * phi[z, k] * inv0[k]
                    s += t
                    b += abs(t)
                if s < best_raw:
                    best_raw = s
                    arg_raw[0] = x
                    arg_raw[1] = y
                    arg_raw[2] = z
                r = s / b if b > 0.0 else 0.0
                if r < best_norm:
                    best_norm = r
                    arg_norm[0] = x
                    arg_norm[1] = y
                    arg_norm[2] = z
    return best_raw, arg_raw, best_norm, arg_norm


def _triple_sum_min_numpy(phi, inv0):
    n = phi.shape[0]
    terms = phi[:, None, None, :] * phi[None, :, None, :] * phi[None, None, :, :] * inv0
    s = terms.sum(axis=3)
    b = np.abs(terms).sum(axis=3)
    x, y, z = np.indices((n, n, n))
    sorted_mask = (x <= y) & (y <= z)
    raw = np.where(sorted_mask, s, np.inf)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(b > 0, s / np.where(b > 0, b, 1.0), 0.0)
    norm = np.where(sorted_mask, ratio, np.inf)
    i_raw = np.unravel_index(np.argmin(raw), raw.shape)
    i_norm = np.unravel_index(np.argmin(norm), norm.shape)
    return float(raw[i_raw]), np.array(i_raw), float(norm[i_norm]), np.array(i_norm)


def _triple_entry(impl):
    def triple_sum_min(phi, inv0):
        phi = np.ascontiguousarray(phi, dtype=float)
        inv0 = np.ascontiguousarray(inv0, dtype=float)
        raw, a_raw, norm, a_norm = impl(phi, inv0)
        return (float(raw), tuple(int(v) for v in a_raw),
                float(norm), tuple(int(v) for v in a_norm))

    triple_sum_min.__doc__ = """Minimum of the triple sums over sorted triples x <= y <= z.

    ``phi[x, k]`` is eigenvector ``k`` at state ``x`` and ``inv0[k]`` is
    ``1 / phi[x0, k]``.  Returns ``(raw_min, raw_argmin, norm_min,
    norm_argmin)`` where the normalised value divides each sum by the sum of
    absolute values of its terms.
    """
    return triple_sum_min


triple_sum_min_numba = _triple_entry(_triple_sum_min_numba)
triple_sum_min_numpy = _triple_entry(_triple_sum_min_numpy)


# ---------------------------------------------------------------------------
# discrete wave equation, marched in the second coordinate
# ---------------------------------------------------------------------------

@njit(cache=True)
def _wave_march_numba(P, row0):
    n = P.shape[0]
    k = np.zeros((n, n))
    for x in range(n):
        k[x, 0] = row0[x]
    for y in range(n - 1):
        up = P[y, y + 1]
        for x in range(n):
            l1 = 0.0
            if x > 0:
                l1 += P[x, x - 1] * (k[x - 1, y] - k[x, y])
            if x < n - 1:
                l1 += P[x, x + 1] * (k[x + 1, y] - k[x, y])
            down = 0.0
            if y > 0:
                down = P[y, y - 1] * (k[x, y - 1] - k[x, y])
            k[x, y + 1] = k[x, y] + (l1 - down) / up
    return k


@np.errstate(over="ignore", invalid="ignore", divide="ignore")  # callers reject non-finite grids
def _wave_march_numpy(P, row0):
    n = P.shape[0]
    k = np.zeros((n, n))
    k[:, 0] = row0
    lower = np.concatenate(([0.0], np.diag(P, -1)))  # P(x, x-1)
    upper = np.concatenate((np.diag(P, 1), [0.0]))   # P(x, x+1)
    for y in range(n - 1):
        col = k[:, y]
        left = np.concatenate((col[:1], col[:-1]))
        right = np.concatenate((col[1:], col[-1:]))
        l1 = lower * (left - col) + upper * (right - col)
        down = P[y, y - 1] * (k[:, y - 1] - col) if y > 0 else 0.0
        k[:, y + 1] = col + (l1 - down) / P[y, y + 1]
    return k


def _wave_entry(impl):
    def wave_march(P, row0):
        P = np.ascontiguousarray(P, dtype=float)
        row0 = np.ascontiguousarray(row0, dtype=float)
        return impl(P, row0)

    wave_march.__doc__ = """March the discrete wave equation from ``k[:, 0] = row0``.

    ``P`` must be tridiagonal with ``P[y, y+1] > 0`` for ``y < n-1``; the
    caller checks that.  Returns the full ``n x n`` grid ``k[x, y]``.
    """
    return wave_march


wave_march_numba = _wave_entry(_wave_march_numba)
wave_march_numpy = _wave_entry(_wave_march_numpy)


# ---------------------------------------------------------------------------
# phase-I simplex on a dense tableau
# ---------------------------------------------------------------------------

# Entries below this are round-off in the reduced tableau and are set to 0.
_ZERO = 1e-12


@njit(cache=True)
def _phase1_numba(A, b, cost_tol, pivot_tol, max_iter):
    m, nv = A.shape
    ncol = nv + m
    T = np.zeros((m, ncol))
    rhs = b.copy()
    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        for j in range(nv):
            T[i, j] = A[i, j]
        T[i, nv + i] = 1.0
        basis[i] = nv + i
    red = np.zeros(ncol)
    it = 0
    status = 0
    while True:
        # reduced costs from the current basis; updating them in place
        # drifts on badly scaled systems
        for j in range(ncol):
            red[j] = 1.0 if j >= nv else 0.0
        for i in range(m):
            if basis[i] >= nv:
                for j in range(ncol):
                    red[j] -= T[i, j]
        enter = -1
        for j in range(ncol):
            if red[j] < -cost_tol:
                enter = j
                break
        if enter < 0:
            break
        if it >= max_iter:
            status = 1
            break
        best = np.inf
        for i in range(m):
            if T[i, enter] > pivot_tol:
                best = min(best, rhs[i] / T[i, enter])
        # among tied rows take the largest pivot, not the lowest index: the
        # redundant commutation rows carry round-off entries that are
        # otherwise picked as pivots.  A tie is measured by the negative rhs
        # the pivot would leave behind, not by the ratio gap
        leave = -1
        for i in range(m):
            a = T[i, enter]
            if a > pivot_tol and rhs[i] - a * best <= _ZERO:
                if leave < 0 or a > T[leave, enter]:
                    leave = i
        if leave < 0:
            status = 2  # unbounded cannot happen in phase I; treat as failure
            break
        piv = T[leave, enter]
        for j in range(ncol):
            T[leave, j] /= piv
        rhs[leave] /= piv
        for i in range(m):
            if i != leave:
                f = T[i, enter]
                if f != 0.0:
                    for j in range(ncol):
                        T[i, j] -= f * T[leave, j]
                        if abs(T[i, j]) < _ZERO:
                            T[i, j] = 0.0
                    rhs[i] -= f * rhs[leave]
                    if abs(rhs[i]) < _ZERO:
                        rhs[i] = 0.0
        basis[leave] = enter
        it += 1
    obj = 0.0
    x = np.zeros(nv)
    for i in range(m):
        if basis[i] < nv:
            x[basis[i]] = rhs[i]
        else:
            obj += abs(rhs[i])
    return obj, x, status, it


def _phase1_numpy(A, b, cost_tol, pivot_tol, max_iter):
    m, nv = A.shape
    T = np.hstack([A, np.eye(m)])
    rhs = b.copy()
    basis = np.arange(nv, nv + m)
    cost = np.concatenate([np.zeros(nv), np.ones(m)])
    it = 0
    status = 0
    while True:
        red = cost - cost[basis] @ T
        candidates = np.flatnonzero(red < -cost_tol)
        if candidates.size == 0:
            break
        if it >= max_iter:
            status = 1
            break
        enter = candidates[0]
        col = T[:, enter]
        rows = np.flatnonzero(col > pivot_tol)
        if rows.size == 0:
            status = 2
            break
        ratios = rhs[rows] / col[rows]
        ties = rows[rhs[rows] - col[rows] * ratios.min() <= _ZERO]
        leave = ties[np.argmax(col[ties])]
        piv = T[leave, enter]
        T[leave] /= piv
        rhs[leave] /= piv
        f = T[:, enter].copy()
        f[leave] = 0.0
        T -= np.outer(f, T[leave])
        rhs -= f * rhs[leave]
        T[np.abs(T) < _ZERO] = 0.0
        rhs[np.abs(rhs) < _ZERO] = 0.0
        basis[leave] = enter
        it += 1
    x = np.zeros(nv)
    mask = basis < nv
    x[basis[mask]] = rhs[mask]
    return float(np.abs(rhs[~mask]).sum()), x, status, it


def _phase1_entry(impl):
    def phase1(A, b, cost_tol=1e-11, pivot_tol=1e-9, max_iter=100_000):
        A = np.ascontiguousarray(A, dtype=float)
        b = np.ascontiguousarray(b, dtype=float)
        value, x, status, it = impl(A, b, float(cost_tol), float(pivot_tol), int(max_iter))
        return float(value), x, int(status), int(it)

    phase1.__doc__ = """Phase-I simplex for ``{x >= 0 : A x = b}`` with ``b >= 0``.

    Minimises the sum of artificial variables.  The entering column is the
    lowest-index one with negative reduced cost (Bland); ties in the ratio
    test go to the largest pivot.  Returns
    ``(artificial_sum, x, status, iterations)``; status 0 is optimal, 1 is
    the iteration cap, 2 is a failed ratio test.
    """
    return phase1


phase1_numba = _phase1_entry(_phase1_numba)
phase1_numpy = _phase1_entry(_phase1_numpy)


if USE_NUMBA:
    jacobi_eigh = jacobi_eigh_numba
    triple_sum_min = triple_sum_min_numba
    wave_march = wave_march_numba
    phase1 = phase1_numba
else:
    jacobi_eigh = jacobi_eigh_numpy
    triple_sum_min = triple_sum_min_numpy
    wave_march = wave_march_numpy
    phase1 = phase1_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
