"""Named kernels and composite constructions shared by the CLI and the tests."""
from __future__ import annotations

import itertools

import numpy as np

from .intertwine import check_intertwining
from .kernel import DEFAULT_TOL, MarkovKernel, Tolerances, validate_kernel
from .metropolis import kernel_MU, kernel_variant, sigma, symmetrize_potential
from .symmetry import Permutation, quotient, symmetry_group

__all__ = [
    "m0_kernel",
    "hat_kernel",
    "cyclic_walk",
    "two_state",
    "random_birth_death",
    "random_reversible",
    "tensor_power",
    "coordinate_average",
    "coordinate_permutations",
    "two_state_commutator",
    "sample_tensor_commutator",
    "desymmetrize",
]


def m0_kernel(N: int) -> MarkovKernel:
    """Lazy-at-the-ends nearest-neighbour walk on ``0..N`` (rates 1/2)."""
    return kernel_MU(np.zeros(N + 1))


def hat_kernel(N: int) -> MarkovKernel:
    """Nearest-neighbour walk on ``0..N`` whose ends always step inwards."""
    return kernel_variant(np.zeros(N + 1), "hat")


def cyclic_walk(n: int) -> MarkovKernel:
    """Simple random walk on ``Z / nZ`` (steps +-1 with probability 1/2)."""
    M = np.zeros((n, n))
    for x in range(n):
        M[x, (x + 1) % n] += 0.5
        M[x, (x - 1) % n] += 0.5
    return validate_kernel(M)


def two_state(a: float, b: float) -> MarkovKernel:
    """``[[1-a, a], [b, 1-b]]``."""
    return validate_kernel([[1 - a, a], [b, 1 - b]])


def random_birth_death(rng, N: int, low: float = 0.1, high: float = 0.45) -> MarkovKernel:
    """Birth-and-death kernel with i.i.d. uniform up and down rates."""
    M = np.zeros((N + 1, N + 1))
    for x in range(N):
        M[x, x + 1] = rng.uniform(low, high)
        M[x + 1, x] = rng.uniform(low, high)
    np.fill_diagonal(M, 1.0 - M.sum(axis=1))
    return validate_kernel(M)


def random_reversible(rng, n: int, density: float = 1.0) -> tuple:
    """Random kernel reversible for a random positive measure.

    Built as ``P(x,y) = W(x,y) / (mu(x) c)`` off the diagonal from a
    symmetric non-negative ``W``; returns ``(kernel, mu)``.
    """
    mu = rng.uniform(0.5, 1.5, size=n)
    mu /= mu.sum()
    W = rng.uniform(0.0, 1.0, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    W = np.triu(W, 1)
    W = W + W.T
    off = W / mu[:, None]
    scale = max(1.0, off.sum(axis=1).max()) * 1.25
    off /= scale
    np.fill_diagonal(off, 1.0 - off.sum(axis=1))
    return validate_kernel(off), mu


def tensor_power(P, m: int) -> MarkovKernel:
    """``P`` tensored ``m`` times; state ``i`` has coordinate ``j`` equal to
    bit ``m-1-j`` of ``i`` for a two-state ``P``."""
    M = np.asarray(P, dtype=float)
    out = np.ones((1, 1))
    for _ in range(m):
        out = np.kron(out, M)
    return validate_kernel(out)


def coordinate_average(P, m: int) -> MarkovKernel:
    """Move one uniformly chosen coordinate with ``P``, leave the others.

    ``(1/m) sum_i I x .. x P x .. x I``, the discrete-time chain of the
    summed generator; for two-state ``P`` its quotient by coordinate
    permutations is the biased Ehrenfest birth-and-death chain.  Every
    tensor product of kernels commuting with ``P`` commutes with it, as do
    coordinate permutations.
    """
    M = np.asarray(P, dtype=float)
    b = M.shape[0]
    out = np.zeros((b ** m, b ** m))
    for i in range(m):
        term = np.ones((1, 1))
        for j in range(m):
            term = np.kron(term, M if j == i else np.eye(b))
        out += term
    return validate_kernel(out / m)


def coordinate_permutations(m: int, base: int = 2) -> list:
    """Permutations of ``base**m`` states induced by permuting coordinates."""
    states = list(itertools.product(range(base), repeat=m))
    index = {s: i for i, s in enumerate(states)}
    out = []
    for sigma_ in itertools.permutations(range(m)):
        out.append(Permutation(tuple(index[tuple(s[j] for j in sigma_)] for s in states)))
    return out


def two_state_commutator(mu, b: float) -> np.ndarray:
    """``b I + (1 - b) 1 mu``: every kernel commuting with an irreducible
    two-state kernel of stationary law ``mu`` has this form; it is Markov for
    ``b`` in ``[-min(mu)/max(mu), 1]``."""
    mu = np.asarray(mu, dtype=float)
    return b * np.eye(2) + (1.0 - b) * np.tile(mu, (2, 1))


def sample_tensor_commutator(mu, m: int, rng, count: int) -> list:
    """Random Markov kernels commuting with both the ``m``-fold tensor power
    and the coordinate average of a two-state kernel with stationary law
    ``mu``.

    Mixes tensor products of two-state commuting kernels, coordinate
    permutation matrices and convex combinations of those.
    """
    mu = np.asarray(mu, dtype=float)
    lo = -mu.min() / mu.max()
    perms = coordinate_permutations(m)
    n = 2 ** m

    def product():
        out = np.ones((1, 1))
        for _ in range(m):
            out = np.kron(out, two_state_commutator(mu, rng.uniform(lo, 1.0)))
        return out

    def perm_matrix():
        g = perms[rng.integers(len(perms))]
        T = np.zeros((n, n))
        T[np.arange(n), g.map] = 1.0
        return T

    out = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            K = product()
        elif kind == 1:
            K = perm_matrix() @ product()
        else:
            w = rng.dirichlet(np.ones(3))
            K = w[0] * product() + w[1] * perm_matrix() + w[2] * product() @ perm_matrix()
        out.append(K)
    return out


def desymmetrize(U, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Mirror a monotone potential, lump the mirror images, compare with M_U.

    The potential (oriented to be non-increasing) is mirrored onto
    ``0..2N+1``; the Metropolis kernel there is quotiented by its symmetry
    group.  The quotient should equal ``a M_U + (1 - a) I`` with ``a`` the
    ratio of the two row-mass normalisers.

    Returns
    -------
    dict
        ``potential`` (oriented), ``quotient`` (QuotientResult),
        ``group_size``, ``alpha``, ``combination_residual`` and
        ``intertwining_residual``.
    """
    Ubar = symmetrize_potential(U)
    N = (Ubar.N - 1) // 2
    v = Ubar.values[: N + 1]
    Mbar = kernel_MU(Ubar, tol)
    G = symmetry_group(Mbar, tol)
    q = quotient(Mbar, G, tol)
    M = kernel_MU(v, tol).matrix
    alpha = sigma(v) / sigma(Ubar)
    target = alpha * M + (1 - alpha) * np.eye(N + 1)
    return {
        "potential": v,
        "quotient": q,
        "group_size": len(G),
        "alpha": alpha,
        "combination_residual": float(np.max(np.abs(q.kernel.matrix - target))),
        "intertwining_residual": check_intertwining(Mbar.matrix, q.link, q.kernel.matrix),
    }
