import numpy as np
import pytest
import scipy.linalg
from hypothesis import given

import markov_commutator as mc
from markov_commutator import corpus
from markov_commutator.errors import NonPositiveMeasure, NotReversible

from .strategies import birth_death, reversible


def _scipy_eigenvalues(P, mu):
    r = np.sqrt(mu)
    S = r[:, None] * P / r[None, :]
    return np.sort(scipy.linalg.eigh(0.5 * (S + S.T), eigvals_only=True))[::-1]


def test_decomposition_layout():
    d = mc.decompose(corpus.m0_kernel(4))
    assert d.eigenvalues[0] == 1.0
    assert np.all(np.diff(d.eigenvalues) <= 0)
    np.testing.assert_array_equal(d.eigenvectors[:, 0], 1.0)
    assert d.simple
    assert mc.is_uniplicit(d)


@given(reversible())
def test_eigenvalues_match_scipy(case):
    P, mu = case
    d = mc.decompose(P, mu)
    np.testing.assert_allclose(d.eigenvalues, _scipy_eigenvalues(P.matrix, mu), atol=1e-12)


@given(reversible())
def test_orthonormal_and_reconstructs(case):
    P, mu = case
    d = mc.decompose(P, mu)
    assert mc.orthonormality_residual(d) < 1e-12
    assert mc.eigen_residual(d, P) < 1e-12
    np.testing.assert_allclose(mc.reconstruct(d).matrix, P.matrix, atol=1e-12)


@given(birth_death())
def test_birth_death_is_uniplicit(P):
    d = mc.decompose(P)
    assert mc.is_uniplicit(d)
    assert np.all(np.abs(d.eigenvectors[0]) > 0)


def test_sign_convention():
    d = mc.decompose(corpus.random_birth_death(np.random.default_rng(3), 6))
    for l in range(1, d.n):
        col = d.eigenvectors[:, l]
        first = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())[0]
        assert col[first] > 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_cycle_not_uniplicit(n):
    d = mc.decompose(corpus.cyclic_walk(n))
    assert not d.simple
    assert not mc.is_uniplicit(d)


def test_mirror_pairs_stay_separated():
    # near-degenerate even/odd pairs of a steep symmetric potential
    N = 10
    U = np.array([mc.LN2 * (x - N / 2) ** 2 * 1.3 for x in range(N + 1)])
    P = mc.kernel_MU(U)
    d = mc.decompose(P, mc.gibbs_measure(U))
    phi = d.eigenvectors
    for l in range(N + 1):
        col = phi[:, l]
        even = np.max(np.abs(col - col[::-1]))
        odd = np.max(np.abs(col + col[::-1]))
        assert min(even, odd) < 1e-8 * np.abs(col).max()


def test_vanishing_index():
    d = mc.decompose(corpus.m0_kernel(2))
    # the antisymmetric eigenvector vanishes at the middle state
    assert mc.vanishing_index(d, 1) == 1
    assert mc.vanishing_index(d, 0) is None


def test_errors():
    with pytest.raises(NotReversible):
        mc.decompose([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    with pytest.raises(NonPositiveMeasure):
        mc.decompose([[0.5, 0.5], [0.5, 0.5]], mu=[1.0, 0.0])


def test_refined_eigenvectors_agree():
    P = corpus.random_birth_death(np.random.default_rng(8), 9)
    d = mc.decompose(P)
    ref = mc.refined_eigenvectors(d, P.matrix)
    np.testing.assert_allclose(np.asarray(ref, dtype=float), d.eigenvectors, atol=1e-10)


def test_json_roundtrip():
    from markov_commutator.io import decomposition_from_json, dumps, read_json
    d = mc.decompose(corpus.hat_kernel(3))
    e = decomposition_from_json(read_json(dumps(d)))
    np.testing.assert_allclose(e.eigenvalues, d.eigenvalues)
    np.testing.assert_allclose(e.eigenvectors, d.eigenvectors)
    np.testing.assert_allclose(e.mu, d.mu)
    assert e.simple == d.simple
