import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_cov
from lvglasso.core import ConfigError, NumericalError, penalty_matrix
from lvglasso.glasso import (GlassoProblem, check_kkt, glasso_objective, glasso_path,
                             lambda_max, soft_threshold, solve_glasso)
from oracles import glasso_dual_value

SIGMA2 = np.array([[1.0, 0.5], [0.5, 1.0]])


@pytest.mark.parametrize("x, t, expected", [(3.0, 1.0, 2.0), (-0.5, 1.0, 0.0), (-3.0, 1.0, -2.0)])
def test_soft_threshold_examples(x, t, expected):
    assert soft_threshold(x, t) == expected


@given(st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_soft_threshold_properties(x, t):
    y = soft_threshold(x, t)
    assert soft_threshold(-x, t) == -y
    assert abs(y) <= abs(x)
    assert y == 0 or np.sign(y) == np.sign(x)


def test_soft_threshold_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def test_identity_stays_identity():
    sol = solve_glasso(GlassoProblem(np.eye(3), penalty_matrix(3, 0.1)))
    np.testing.assert_array_equal(sol.K, np.eye(3))
    assert sol.converged


def test_two_by_two_edge_death():
    sol = solve_glasso(GlassoProblem(SIGMA2, penalty_matrix(2, 0.5)))
    np.testing.assert_array_equal(sol.K, np.eye(2))


def test_two_by_two_closed_form():
    # W12 = s12 - lam * sign(s12); K = W^{-1}
    sol = solve_glasso(GlassoProblem(SIGMA2, penalty_matrix(2, 0.2)))
    np.testing.assert_allclose(sol.W, [[1.0, 0.3], [0.3, 1.0]], atol=1e-12)
    np.testing.assert_allclose(sol.K, np.array([[1.0, -0.3], [-0.3, 1.0]]) / 0.91, atol=1e-12)


def test_kkt_closed_form_passes():
    prob = GlassoProblem(SIGMA2, penalty_matrix(2, 0.2))
    assert check_kkt(solve_glasso(prob), prob, 1e-6).ok


def test_kkt_flags_wrong_solution():
    prob = GlassoProblem(SIGMA2, penalty_matrix(2, 0.1))
    sol = solve_glasso(prob)
    sol.K = np.eye(2)
    report = check_kkt(sol, prob, 1e-6)
    assert not report.ok
    assert (0, 1, "bound", pytest.approx(0.4)) in report.violations


def test_kkt_unpenalized_inverse(rng):
    S = random_cov(rng, 4)
    prob = GlassoProblem(S, np.zeros((4, 4)))
    sol = solve_glasso(prob)
    np.testing.assert_allclose(sol.K, np.linalg.inv(S), rtol=1e-10)
    assert check_kkt(sol, prob, 1e-6).ok


def test_kkt_dimension_mismatch():
    prob = GlassoProblem(SIGMA2, penalty_matrix(2, 0.1))
    sol = solve_glasso(GlassoProblem(np.eye(3), penalty_matrix(3, 0.1)))
    with pytest.raises(ValueError):
        check_kkt(sol, prob)


def test_zero_penalty_via_descent_matches_inverse(rng):
    # tiny penalty on one pair forces the coordinate-descent path
    S = random_cov(rng, 5)
    P = np.zeros((5, 5))
    P[0, 1] = P[1, 0] = 1e-300
    sol = solve_glasso(GlassoProblem(S, P, tol=1e-10, max_sweeps=2000))
    Kinv = np.linalg.inv(S)
    assert np.linalg.norm(sol.K - Kinv) <= 1e-6 * np.linalg.norm(Kinv)


def test_full_shrinkage_is_diagonal(rng):
    for _ in range(10):
        S = random_cov(rng, 5)
        sol = solve_glasso(GlassoProblem(S, penalty_matrix(5, lambda_max(S))))
        np.testing.assert_array_equal(sol.K, np.diag(np.diag(sol.K)))
        np.testing.assert_allclose(np.diag(sol.K), 1 / np.diag(S), rtol=1e-12)


def test_kkt_on_random_converged_solves(rng):
    for _ in range(30):
        d = int(rng.integers(2, 9))
        S = random_cov(rng, d)
        prob = GlassoProblem(S, penalty_matrix(d, rng.uniform(0.01, 0.5) * lambda_max(S)))
        sol = solve_glasso(prob)
        assert sol.converged
        assert check_kkt(sol, prob, 1e-5).ok
        assert np.max(np.abs(sol.K @ sol.W - np.eye(d))) <= 1e-4


def test_permutation_equivariance(rng):
    S = random_cov(rng, 6)
    P = penalty_matrix(6, 0.2 * lambda_max(S))
    base = solve_glasso(GlassoProblem(S, P, tol=1e-12, max_sweeps=5000)).K
    for _ in range(20):
        perm = rng.permutation(6)
        Kp = solve_glasso(GlassoProblem(S[np.ix_(perm, perm)], P, tol=1e-12, max_sweeps=5000)).K
        np.testing.assert_allclose(Kp, base[np.ix_(perm, perm)], atol=1e-8)


def test_entrywise_penalty_leaves_block_free(rng):
    S = random_cov(rng, 5)
    P = penalty_matrix(5, 10.0)
    P[3:, :] = P[:, 3:] = 0.0
    sol = solve_glasso(GlassoProblem(S, P))
    # heavily penalized block is diagonal, unpenalized rows are dense
    assert np.count_nonzero(sol.K[:3, :3] - np.diag(np.diag(sol.K[:3, :3]))) == 0
    assert np.all(sol.K[:, 3:] != 0)
    assert check_kkt(sol, GlassoProblem(S, P), 1e-5).ok


def test_objective_matches_dual_oracle(rng):
    for _ in range(10):
        d = int(rng.integers(2, 5))
        S = random_cov(rng, d)
        P = penalty_matrix(d, rng.uniform(0, 0.5))
        sol = solve_glasso(GlassoProblem(S, P))
        dual, _ = glasso_dual_value(S, P)
        assert glasso_objective(sol.K, S, P) == pytest.approx(dual, abs=1e-5)


def test_nonconvergence_is_reported(rng):
    S = random_cov(rng, 8)
    sol = solve_glasso(GlassoProblem(S, penalty_matrix(8, 0.01), tol=1e-14, max_sweeps=1))
    assert not sol.converged
    assert sol.sweeps_used == 1


def test_problem_validation():
    with pytest.raises(ConfigError):
        GlassoProblem(SIGMA2, -np.ones((2, 2)))
    with pytest.raises(ValueError):
        GlassoProblem(SIGMA2, np.zeros((3, 3)))


def test_nonpositive_diagonal_raises():
    with pytest.raises(NumericalError):
        solve_glasso(GlassoProblem(np.zeros((2, 2)), penalty_matrix(2, 0.1)))


def test_path_starts_empty_and_matches_single_solves(rng):
    S = random_cov(rng, 4)
    lmax = lambda_max(S)
    lams = [lmax, 0.6 * lmax, 0.3 * lmax, 0.1 * lmax, 0.02 * lmax]
    path = glasso_path(S, lams)
    assert np.count_nonzero(path[0].K - np.diag(np.diag(path[0].K))) == 0
    edges = [np.count_nonzero(np.triu(s.K, 1)) for s in path]
    assert edges == sorted(edges)  # non-increasing in lambda
    for lam, warm in zip(lams, path):
        cold = solve_glasso(GlassoProblem(S, penalty_matrix(4, lam)))
        np.testing.assert_allclose(warm.K, cold.K, atol=1e-5)


def test_path_single_lambda_is_solve(rng):
    S = random_cov(rng, 4)
    (sol,) = glasso_path(S, [0.1])
    np.testing.assert_array_equal(sol.K, solve_glasso(GlassoProblem(S, penalty_matrix(4, 0.1))).K)


def test_path_requires_descending():
    with pytest.raises(ConfigError):
        glasso_path(np.eye(2), [0.1, 0.2])
