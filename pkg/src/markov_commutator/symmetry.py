"""Permutation symmetries of a kernel and the quotient by a symmetry group."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentQuotient, NotASymmetry, NotUniplicit, SizeLimitExceeded, ValidationError
from .intertwine import Link, deterministic_link
from .kernel import DEFAULT_TOL, MarkovKernel, Tolerances, as_kernel, validate_kernel
from .spectral import decompose, is_uniplicit

__all__ = [
    "Permutation",
    "QuotientResult",
    "GROUP_SEARCH_LIMIT",
    "is_symmetry",
    "symmetry_group",
    "orbit",
    "quotient",
    "verify_prop2",
]

GROUP_SEARCH_LIMIT = 10


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``0..n-1`` stored as the tuple of images."""

    map: tuple

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(len(m))):
            raise ValidationError(f"{m} is not a permutation")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def reflection(cls, n: int) -> "Permutation":
        return cls(tuple(range(n - 1, -1, -1)))

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, x: int) -> int:
        return self.map[x]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self`` after ``other``."""
        return Permutation(tuple(self.map[v] for v in other.map))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for x, y in enumerate(self.map):
            inv[y] = x
        return Permutation(tuple(inv))

    def to_json(self) -> list:
        return list(self.map)


@dataclass(frozen=True, eq=False)
class QuotientResult:
    """Kernel induced on the classes of a symmetry group.

    Attributes
    ----------
    projection : numpy.ndarray
        Class index of every state; classes are numbered by their smallest
        member.
    kernel : MarkovKernel
        ``P(c, c') = Pbar(xb, class c')`` for any member ``xb`` of ``c``.
    link : Link
        Deterministic link of the projection.
    """

    projection: np.ndarray
    kernel: MarkovKernel
    link: Link

    def to_json(self) -> dict:
        return {"projection": self.projection.tolist(), "kernel": self.kernel.to_json(),
                "link": self.link.to_json()}


def _symmetry_defect(M: np.ndarray, g: Permutation) -> float:
    idx = np.asarray(g.map)
    return float(np.max(np.abs(M[np.ix_(idx, idx)] - M)))


def is_symmetry(P, g: Permutation, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``P(g(x), g(y)) == P(x, y)`` within ``tol_residual``."""
    M = np.asarray(P, dtype=float)
    if g.n != M.shape[0]:
        return False
    return _symmetry_defect(M, g) <= tol.tol_residual


def symmetry_group(P, tol: Tolerances = DEFAULT_TOL, limit: int = GROUP_SEARCH_LIMIT) -> list:
    """All permutations preserving ``P``.

    Irreducible birth-and-death kernels only admit the identity and the
    reflection ``x -> N - x`` as candidates.  Other kernels are searched
    exhaustively by backtracking; a state may only be sent to a state with
    the same diagonal entry and the same sorted row.

    Returns
    -------
    list of Permutation
        Sorted by image tuple, so the identity comes first.

    Raises
    ------
    SizeLimitExceeded
        More than ``limit`` states and not birth-and-death.
    """
    P = as_kernel(P, tol)
    M = P.matrix
    n = P.n
    eps = tol.tol_residual
    if P.birth_death and P.irreducible:
        cands = [Permutation.identity(n), Permutation.reflection(n)]
        found = {g.map: g for g in cands if is_symmetry(M, g, tol)}
        return [found[k] for k in sorted(found)]
    if n > limit:
        raise SizeLimitExceeded(f"exhaustive symmetry search is limited to {limit} states, got {n}")

    rows = np.sort(M, axis=1)
    diag = np.diag(M)
    allowed = [
        [y for y in range(n) if abs(diag[x] - diag[y]) <= eps and np.max(np.abs(rows[x] - rows[y])) <= eps]
        for x in range(n)
    ]
    image = [-1] * n
    used = [False] * n
    out = []

    def extend(x):
        if x == n:
            out.append(Permutation(tuple(image)))
            return
        for y in allowed[x]:
            if used[y]:
                continue
            ok = True
            for xp in range(x):
                yp = image[xp]
                if abs(M[y, yp] - M[x, xp]) > eps or abs(M[yp, y] - M[xp, x]) > eps:
                    ok = False
                    break
            if ok:
                image[x] = y
                used[y] = True
                extend(x + 1)
                used[y] = False
        image[x] = -1

    extend(0)
    return sorted(out, key=lambda g: g.map)


def orbit(points, group) -> frozenset:
    """Closure of ``points`` under the permutations in ``group``."""
    seen = set(int(p) for p in points)
    frontier = list(seen)
    while frontier:
        x = frontier.pop()
        for g in group:
            y = g(x)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return frozenset(seen)


def _classes(n: int, group) -> np.ndarray:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in group:
        for x in range(n):
            a, b = find(x), find(g(x))
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = [find(x) for x in range(n)]
    label = {}
    for x in range(n):
        label.setdefault(roots[x], len(label))
    return np.array([label[r] for r in roots], dtype=int)


def quotient(Pbar, G, tol: Tolerances = DEFAULT_TOL) -> QuotientResult:
    """Lump the orbits of ``G`` into single states.

    Raises
    ------
    NotASymmetry
        Some element of ``G`` does not preserve ``Pbar``.
    InconsistentQuotient
        Two members of a class disagree on the mass sent to another class.
    """
    Pbar = as_kernel(Pbar, tol)
    M = Pbar.matrix
    n = Pbar.n
    for g in G:
        if g.n != n or not is_symmetry(M, g, tol):
            raise NotASymmetry(g.map)
    pi = _classes(n, G)
    m = int(pi.max()) + 1
    link = deterministic_link(pi, m)
    lumped = M @ link.matrix
    reps = np.array([int(np.flatnonzero(pi == c)[0]) for c in range(m)])
    Q = lumped[reps]
    gap = float(np.max(np.abs(lumped - Q[pi])))
    if gap > tol.tol_residual:
        raise InconsistentQuotient(f"class members disagree by {gap:.3e}")
    pi.setflags(write=False)
    return QuotientResult(pi, validate_kernel(Q, tol), link)


def verify_prop2(P, hset, tol: Tolerances = DEFAULT_TOL, group=None) -> bool:
    """Whether the hypergroup set is a single orbit of the symmetry group.

    An empty set is accepted (nothing to compare).

    Raises
    ------
    NotUniplicit
    """
    P = as_kernel(P, tol)
    if not (P.irreducible and is_uniplicit(decompose(P, tol=tol), tol)):
        raise NotUniplicit("the orbit property is stated for kernels with simple spectrum")
    pts = frozenset(int(x) for x in hset)
    if not pts:
        return True
    if group is None:
        group = symmetry_group(P, tol)
    return orbit({min(pts)}, group) == pts
