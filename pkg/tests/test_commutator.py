import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

import markov_commutator as mc
from markov_commutator import corpus
from markov_commutator import _kernels
from markov_commutator.errors import InternalInconsistency, SizeLimitExceeded

from .strategies import birth_death, seeds


def _scipy_feasible(P, x0, m0):
    """Same feasibility question handed to scipy's HiGHS solver."""
    n = P.shape[0]
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            # (KP - PK)(i, j) = sum_k K(i,k) P(k,j) - P(i,k) K(k,j)
            r = np.zeros((n, n))
            r[i, :] += P[:, j]
            r[:, j] -= P[i, :]
            rows.append(r.ravel())
            rhs.append(0.0)
    for i in range(n):
        r = np.zeros((n, n))
        r[i, :] = 1.0
        rows.append(r.ravel())
        rhs.append(1.0)
    for j in range(n):
        r = np.zeros((n, n))
        r[x0, j] = 1.0
        rows.append(r.ravel())
        rhs.append(m0[j])
    res = scipy.optimize.linprog(np.zeros(n * n), A_eq=np.array(rows), b_eq=np.array(rhs),
                                 bounds=(0, None), method="highs", options={"presolve": False})
    return res.status == 0


def _polynomial_fit(P, theta, coeffs):
    """``sum_k c_k P^k`` with ``c`` interpolating ``coeffs`` at ``theta``."""
    c = np.linalg.solve(np.vander(theta, increasing=True), coeffs)
    out = np.zeros_like(P)
    power = np.eye(P.shape[0])
    for ck in c:
        out += ck * power
        power = power @ P
    return out


@given(birth_death(max_N=5), seeds, st.integers(min_value=0, max_value=5))
def test_solution_commutes_and_has_row(P, seed, x0):
    x0 = x0 % P.n
    d = mc.decompose(P)
    m0 = np.random.default_rng(seed).dirichlet(np.ones(P.n))
    sol = mc.solve_commutator(d, x0, m0)
    assert mc.commutation_residual(P.matrix, sol.K) < 1e-9 * max(1.0, np.abs(sol.K).max())
    np.testing.assert_allclose(sol.K[x0], m0, atol=1e-9)
    np.testing.assert_allclose(sol.K.sum(axis=1), 1.0, atol=1e-9)


@given(birth_death(max_N=5), seeds)
def test_markov_solutions_are_polynomials_in_P(P, seed):
    d = mc.decompose(P)
    m0 = np.random.default_rng(seed).dirichlet(np.ones(P.n))
    x0 = int(np.argmin(d.mu))
    sol = mc.solve_commutator(d, x0, m0)
    if not sol.is_markov:
        return
    fit = _polynomial_fit(P.matrix, d.eigenvalues, sol.coefficients)
    np.testing.assert_allclose(fit, sol.K, atol=1e-8)


def test_point_kernel_row():
    d = mc.decompose(corpus.hat_kernel(4))
    for x in range(5):
        sol = mc.point_kernel(d, 0, x)
        np.testing.assert_allclose(sol.K[0], np.eye(5)[x], atol=1e-12)


def test_is_in_commutator():
    P = corpus.hat_kernel(3)
    assert mc.is_in_commutator(P, np.eye(4))
    assert mc.is_in_commutator(P, P.matrix @ P.matrix)
    assert not mc.is_in_commutator(P, np.tile([1, 0, 0, 0], (4, 1)))


@settings(max_examples=25)
@given(seeds, st.integers(min_value=2, max_value=5))
def test_lp_agrees_with_scipy(seed, n):
    rng = np.random.default_rng(seed)
    P, mu = corpus.random_reversible(rng, n, density=rng.uniform(0.4, 1.0))
    x0 = int(rng.integers(n))
    m0 = rng.dirichlet(np.ones(n) * 0.5)
    assert mc.commutator_membership_lp(P, x0, m0) == _scipy_feasible(P.matrix, x0, m0)


def test_lp_solution_is_a_member():
    P = corpus.cyclic_walk(4)
    ok, K = mc.commutator_lp_solution(P, 0, [0, 0.5, 0.5, 0])
    assert ok
    assert mc.is_in_commutator(P, K, mc.DEFAULT_TOL.replace(tol_residual=1e-8))
    np.testing.assert_allclose(K[0], [0, 0.5, 0.5, 0], atol=1e-9)


def test_lp_infeasible_for_m0_middle_row():
    assert not mc.commutator_membership_lp(corpus.m0_kernel(2), 0, [0, 1, 0])
    assert not _scipy_feasible(corpus.m0_kernel(2).matrix, 0, [0, 1, 0])


def test_lp_size_limit():
    P = corpus.m0_kernel(mc.LP_SIZE_LIMIT)
    with pytest.raises(SizeLimitExceeded):
        mc.commutator_membership_lp(P, 0, np.eye(P.n)[0])


def test_certificate_routes_agree_hat():
    P = corpus.hat_kernel(5)
    for x0 in range(6):
        c = mc.check_hypergroup(P, x0)
        assert c.holds == (x0 in (0, 5))
        assert not c.borderline
        assert (c.min_normalized >= -1e-9) == c.holds


def test_certificate_failure_has_witness():
    c = mc.check_hypergroup(corpus.m0_kernel(2), 0)
    assert not c.holds
    assert c.min_triple_sum == pytest.approx(-3.0, abs=1e-12)
    assert c.failing_targets
    assert c.min_kernel_entry < 0
    doc = c.to_json()
    assert doc["holds"] is False and "min_kernel_entry" in doc


def test_certificate_vanishing_eigenvector():
    c = mc.check_hypergroup(corpus.m0_kernel(2), 1)
    assert not c.holds
    assert c.excluded_index == 1


def test_hset_cycle_via_lp():
    for n in (3, 4, 5):
        assert mc.hset(corpus.cyclic_walk(n)) == frozenset(range(n))


@given(birth_death(max_N=6))
def test_hset_points_have_minimal_mass(P):
    mu = mc.stationary_distribution(P)
    h = mc.hset(P, mu=mu)
    assert mc.check_min_weight(P, h, mu=mu)
    for x in h:
        assert mu[x] <= mu.min() * (1 + 1e-9)


@given(birth_death(max_N=6))
def test_hset_membership_matches_lp(P):
    h = mc.hset(P)
    n = P.n
    for x0 in range(n):
        # a point is in the set iff every point mass is reachable
        reachable = all(mc.commutator_membership_lp(P, x0, np.eye(n)[x]) for x in range(n))
        assert reachable == (x0 in h)


def test_lp_on_badly_scaled_kernel():
    # stationary masses span five decades; an incrementally updated simplex
    # objective once drifted negative here and reported a false "feasible"
    U = [0.0, 0.0, 1.4251360471134544, 4.79638342465469, 10.229910811588358]
    P = mc.kernel_variant(U, "paren")
    d = mc.decompose(P)
    eye = np.eye(5)
    for x0 in range(5):
        for t in range(5):
            direct = mc.point_kernel(d, x0, t).is_markov
            assert mc.commutator_membership_lp(P, x0, eye[t]) == direct


def test_lp_matches_direct_solve_on_seven_states():
    # seven states is where lowest-index leaving rows used to cycle
    rng = np.random.default_rng(1)
    for _ in range(12):
        P = corpus.random_birth_death(rng, 6, 0.05, 0.45)
        d = mc.decompose(P)
        for x0 in range(7):
            for t in range(7):
                ok, K = mc.commutator_lp_solution(P, x0, np.eye(7)[t])
                assert ok == mc.point_kernel(d, x0, t).is_markov
                if ok:
                    np.testing.assert_allclose(K, mc.point_kernel(d, x0, t).K, atol=1e-8)


@pytest.mark.parametrize("status", [1, 2])
def test_lp_stalls_are_errors(monkeypatch, status):
    monkeypatch.setattr(_kernels, "phase1", lambda A, b: (0.0, np.zeros(A.shape[1]), status, 0))
    with pytest.raises(InternalInconsistency, match="status"):
        mc.commutator_membership_lp(corpus.cyclic_walk(3), 0, np.eye(3)[1])


def test_lp_bogus_feasible_point_is_an_error(monkeypatch):
    # a "feasible" answer far outside the polytope must not be returned
    def bogus(A, b):
        x = np.zeros(A.shape[1])
        x[::3] = 10.0
        return 0.0, x, 0, 0

    monkeypatch.setattr(_kernels, "phase1", bogus)
    with pytest.raises(InternalInconsistency, match="violates"):
        mc.commutator_membership_lp(corpus.cyclic_walk(3), 0, np.eye(3)[1])
