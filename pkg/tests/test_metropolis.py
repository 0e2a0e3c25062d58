import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import markov_commutator as mc
from markov_commutator import metropolis as m
from markov_commutator.errors import UnknownVariant

from .strategies import potentials, seeds


@given(potentials(), st.sampled_from(m.VARIANTS))
def test_variants_are_stochastic_and_reversible(U, variant):
    if variant == "check" and U.size < 3:
        return
    P = m.kernel_variant(U, variant)
    assert P.birth_death and P.irreducible
    assert P.matrix.min() >= 0
    np.testing.assert_allclose(P.matrix.sum(axis=1), 1.0, atol=1e-14)
    assert mc.is_reversible(P.matrix, m.reversible_measure(U, variant))


@given(potentials(), st.floats(min_value=-50, max_value=50))
def test_constant_shift_invariance(U, c):
    for variant in ("mu", "hat", "paren"):
        np.testing.assert_allclose(m.kernel_variant(U + c, variant).matrix,
                                   m.kernel_variant(U, variant).matrix, atol=1e-12)


@given(potentials())
def test_mu_variant_is_reversible_for_gibbs(U):
    P = m.kernel_MU(U)
    np.testing.assert_allclose(mc.stationary_distribution(P), m.gibbs_measure(U), rtol=1e-9)


def test_zero_potential_gives_m0():
    P = m.kernel_MU(np.zeros(5)).matrix
    expected = np.diag([0.5, 0, 0, 0, 0.5]) + 0.5 * (np.eye(5, k=1) + np.eye(5, k=-1))
    np.testing.assert_allclose(P, expected, atol=1e-15)


def test_tilde_reflects_at_the_top():
    P = m.kernel_variant(np.zeros(4), "tilde").matrix
    np.testing.assert_allclose(P[3], [0, 0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(P[0], [0.5, 0.5, 0, 0], atol=1e-15)


def test_exploration_kernels():
    np.testing.assert_allclose(m.exploration_kernel(4, "check")[2], [0, 0.25, 0, 0.25, 0])
    np.testing.assert_allclose(m.exploration_kernel(3, "hat")[0], [0, 1, 0, 0])


def test_unknown_variant():
    with pytest.raises(UnknownVariant):
        m.kernel_variant([0.0, 0.0], "nope")


def test_sigma_flat():
    assert m.sigma(np.zeros(3)) == pytest.approx(1.0)


def test_classification():
    quad = np.array([mc.LN2 * (x - 2) ** 2 for x in range(5)])
    c = m.classify_potential(quad)
    assert c.in_C and c.in_Ctilde and c.in_Ctilde_s and c.symmetric and not c.in_Ctilde_m
    c = m.classify_potential([2, 1, 0, 1, 2])
    assert c.in_C and not c.in_Ctilde and c.in_Ccheck_s
    assert all(type(v) is bool for v in c.__dict__.values())


@given(seeds, st.integers(min_value=2, max_value=10))
def test_random_ctilde_s_membership(seed, N):
    U = m.random_ctilde_s_potential(seed, N)
    assert U.N == N
    assert m.classify_potential(U).in_Ctilde_s


@given(seeds, st.integers(min_value=2, max_value=8))
def test_random_ctilde_m_membership(seed, N):
    assert m.classify_potential(m.random_ctilde_m_potential(seed, N)).in_Ctilde_m


@given(seeds, st.integers(min_value=3, max_value=8))
def test_random_convex_asym(seed, N):
    U = m.random_convex_potential(seed, N, asym=True)
    c = m.classify_potential(U)
    assert c.in_C and not c.symmetric
    assert U.values[0] == U.values[1]


def test_seed_reproducibility():
    a = m.random_convex_potential(np.random.SeedSequence(9), 6)
    b = m.random_convex_potential(np.random.SeedSequence(9), 6)
    np.testing.assert_array_equal(a.values, b.values)


def test_symmetrize_potential():
    np.testing.assert_allclose(m.symmetrize_potential([0, -1, -3]).values, [0, -1, -3, -3, -1, 0])


def test_check_transform():
    np.testing.assert_allclose(m.check_transform(np.zeros(5)), mc.LN2 * np.array([0, 1, 2, 1, 0]))


@given(seeds, st.integers(min_value=2, max_value=10))
def test_condition_H_on_ctilde_s(seed, N):
    assert m.condition_H(m.kernel_MU(m.random_ctilde_s_potential(seed, N)))


def test_condition_H_fails_for_m0():
    assert not m.condition_H(m.kernel_MU(np.zeros(5)))


def test_check_variant_counterexample():
    """The check construction on this symmetric profile violates the
    monotone-rate condition, yet keeps the hypergroup property at both ends."""
    Ucheck = np.array([2.0, 1.0, 0.0, 1.0, 2.0])
    U = Ucheck - mc.LN2 * np.array([0, 1, 2, 1, 0])
    assert m.classify_potential(Ucheck).in_Ccheck_s
    P = m.kernel_variant(U, "check")
    assert not m.condition_H(P)
    assert mc.hset(P) == frozenset({0, 4})
