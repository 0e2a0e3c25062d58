"""Values frozen from ``tests/oracles/derive.py`` (exact rationals or 50
digits, computed without this package) and values quoted from the source
text of the method."""
import math

import numpy as np
import pytest

import markov_commutator as mc
from markov_commutator import corpus
from markov_commutator.metropolis import kernel_variant

BD4 = np.array([
    [3 / 4, 1 / 4, 0, 0],
    [1 / 3, 1 / 3, 1 / 3, 0],
    [0, 1 / 5, 1 / 2, 3 / 10],
    [0, 0, 2 / 5, 3 / 5],
])
BD4_MU = np.array([16 / 63, 4 / 21, 20 / 63, 5 / 21])
BD4_WAVE_DELTA2 = np.array([
    [0, 0, 63 / 20, 0],
    [0, 21 / 5, -63 / 20, 126 / 25],
    [63 / 20, -63 / 20, 2331 / 1000, 63 / 250],
    [0, 126 / 25, 63 / 250, -21 / 125],
])


# derived, exact arithmetic

def test_stationary_two_state():
    P = corpus.two_state(0.3, 0.1)
    np.testing.assert_allclose(mc.stationary_distribution(P), [1 / 4, 3 / 4], atol=1e-15)


def test_stationary_birth_death():
    np.testing.assert_allclose(mc.stationary_distribution(BD4), BD4_MU, rtol=1e-14)


def test_m0_eigenvalues():
    d = mc.decompose(corpus.m0_kernel(2))
    np.testing.assert_allclose(d.eigenvalues, [1, 0.5, -0.5], atol=1e-14)


def test_gibbs_linear():
    np.testing.assert_allclose(mc.gibbs_measure([0, 1, 2]),
                               [0.6652409557748219, 0.24472847105479764, 0.09003057317038046], rtol=1e-14)


def test_metropolis_two_states():
    P = mc.kernel_MU([0.0, math.log(4)])
    np.testing.assert_allclose(P.matrix, [[0.75, 0.25], [1.0, 0.0]], atol=1e-15)


def test_wave_field_birth_death():
    row0 = np.eye(4)[2] / BD4_MU[2]
    march = mc.solve_wave_march(BD4, row0)
    np.testing.assert_allclose(march.k, BD4_WAVE_DELTA2, atol=1e-12)
    spec = mc.solve_wave_spectral(mc.decompose(BD4), np.eye(4)[2], kernel=BD4)
    np.testing.assert_allclose(spec.k, BD4_WAVE_DELTA2, atol=1e-12)


def test_wave_field_m0():
    f = mc.solve_wave_march(corpus.m0_kernel(2), [0.0, 1.0, 0.0], unnormalized=True)
    np.testing.assert_allclose(f.k, [[0, 1, 0], [1, -1, 1], [0, 1, 0]], atol=1e-14)


def test_commuting_kernel_m0_not_markov():
    d = mc.decompose(corpus.m0_kernel(2))
    sol = mc.solve_commutator(d, 0, [0.0, 1.0, 0.0])
    np.testing.assert_allclose(sol.K, [[0, 1, 0], [1, -1, 1], [0, 1, 0]], atol=1e-13)
    assert not sol.is_markov


@pytest.mark.parametrize("x, expected", [
    (0, np.eye(3)),
    (1, [[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]]),
    (2, [[0, 0, 1], [0, 1, 0], [1, 0, 0]]),
])
def test_point_kernels_hat(x, expected):
    d = mc.decompose(corpus.hat_kernel(2))
    sol = mc.point_kernel(d, 0, x)
    np.testing.assert_allclose(sol.K, expected, atol=1e-13)
    assert sol.is_markov


def test_triple_sum_min_m0():
    value, arg = mc.triple_sum_min(mc.decompose(corpus.m0_kernel(2)), 0)
    assert value == pytest.approx(-3.0, abs=1e-12)
    assert tuple(sorted(arg)) == (1, 1, 1)


def test_triple_sum_min_hat():
    value, _ = mc.triple_sum_min(mc.decompose(corpus.hat_kernel(2)), 0)
    assert value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("P, expected", [
    (corpus.hat_kernel(3), {0, 3}),
    (corpus.hat_kernel(4), {0, 4}),
    (corpus.m0_kernel(3), set()),
    (mc.kernel_MU([math.log(4) * (x - 2) ** 2 for x in range(5)]), {0, 4}),
])
def test_hset_against_high_precision(P, expected):
    assert set(mc.hset(P)) == expected


def test_cycle_symmetry_group_order():
    assert len(mc.symmetry_group(corpus.cyclic_walk(4))) == 8


def test_check_variant_counterexample_rates():
    # up and down rates of the check construction on (2, 1, 0, 1, 2)
    U = np.array([2, 1, 0, 1, 2]) - mc.LN2 * np.array([0, 1, 2, 1, 0])
    P = kernel_variant(U, "check").matrix
    up = np.array([2 ** x * P[x, x + 1] for x in range(3)])
    down = np.array([P[x + 1, x] for x in range(3)])
    np.testing.assert_allclose(up, [1, 1, math.exp(-1)], rtol=1e-12)
    np.testing.assert_allclose(down, [math.exp(-1) / 2, math.exp(-1) / 4, 1 / 2], rtol=1e-12)


# quoted from the source text

def test_remark_value_k11():
    f = mc.solve_wave_march(corpus.m0_kernel(2), [0.0, 1.0, 0.0], unnormalized=True)
    assert f.k[1, 1] == pytest.approx(-1.0, abs=1e-12)
    assert f.k[1, 0] == pytest.approx(1.0, abs=1e-12)


def test_hat_rows():
    P = kernel_variant(np.zeros(3), "hat")
    np.testing.assert_allclose(P.matrix, [[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]], atol=1e-15)


def test_paren_at_zero_potential_is_hat():
    for N in (2, 3, 5):
        np.testing.assert_allclose(kernel_variant(np.zeros(N + 1), "paren").matrix,
                                   corpus.hat_kernel(N).matrix, atol=1e-15)


def test_two_point_hset_is_lighter_state():
    # mu = (2/3, 1/3); the commuting kernels are b I + (1 - b) 1 mu
    assert set(mc.hset(corpus.two_state(0.3, 0.6))) == {1}
    assert set(mc.hset(corpus.two_state(0.5, 0.5))) == {0, 1}
