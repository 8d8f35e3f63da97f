import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_spd
from lvglasso.core import (DataError, DataMatrix, DegenerateColumnError,
                           NotPositiveDefiniteError, NumericalError, PartitionedPrecision,
                           PenaltySpec, as_covariance, empirical_covariance,
                           marginal_precision, neg_log_likelihood, numerical_rank,
                           symmetrize)
from oracles import brute_covariance, det_by_permutations


def test_covariance_two_point_sample():
    C = empirical_covariance(np.array([[1.0, 0.0], [-1.0, 0.0]]), divisor="n")
    np.testing.assert_array_equal(C, [[1.0, 0.0], [0.0, 0.0]])


def test_covariance_identity_rows_matches_brute_force():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    expected = np.array([[0.25, -0.25], [-0.25, 0.25]])
    np.testing.assert_allclose(brute_covariance(X, 2), expected, atol=1e-15)
    np.testing.assert_allclose(empirical_covariance(X), expected, atol=1e-15)


@pytest.mark.parametrize("divisor, denom", [("n", 7), ("n-1", 6)])
def test_covariance_divisor(rng, divisor, denom):
    X = rng.standard_normal((7, 3))
    np.testing.assert_allclose(empirical_covariance(X, divisor=divisor),
                               brute_covariance(X, denom), atol=1e-12)


def test_standardized_diagonal_is_one(rng):
    X = rng.standard_normal((20, 4)) * [1, 10, 0.1, 3] + 5
    C = empirical_covariance(X, standardize=True)
    np.testing.assert_allclose(np.diag(C), 1.0)
    assert np.all(np.abs(C) <= 1 + 1e-12)


def test_zero_variance_column_is_named():
    X = DataMatrix(np.array([[1.0, 2.0], [3.0, 2.0], [5.0, 2.0]]), ("a", "flat"))
    with pytest.raises(DegenerateColumnError, match="flat"):
        empirical_covariance(X, standardize=True)


def test_bad_divisor():
    with pytest.raises(ValueError):
        empirical_covariance(np.eye(3), divisor="n+1")


def test_datamatrix_validation():
    with pytest.raises(DataError):
        DataMatrix(np.ones((1, 3)))
    with pytest.raises(DataError):
        DataMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))
    assert DataMatrix(np.ones((2, 2))).labels == ("V0", "V1")


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 6)),
              elements=st.floats(-1e3, 1e3)))
def test_covariance_is_symmetric_psd(X):
    C = empirical_covariance(X)
    assert np.array_equal(C, C.T)
    ev = np.linalg.eigvalsh(C)
    assert ev[0] >= -1e-10 * max(ev[-1], 1.0)


def test_symmetrize_tolerance():
    A = np.array([[1.0, 0.5], [0.5 + 1e-12, 1.0]])
    assert np.array_equal(symmetrize(A), symmetrize(A).T)
    with pytest.raises(DataError):
        symmetrize(np.array([[1.0, 0.5], [0.4, 1.0]]))


def test_as_covariance_rejects_indefinite():
    with pytest.raises(DataError):
        as_covariance(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_nll_closed_forms():
    assert neg_log_likelihood(np.eye(2), np.eye(2)) == pytest.approx(2.0, abs=1e-15)
    assert neg_log_likelihood(2 * np.eye(2), np.eye(2)) == pytest.approx(-2 * np.log(2) + 4, abs=1e-14)
    assert neg_log_likelihood(2 * np.eye(2), np.eye(2)) == pytest.approx(2.6137056388801094, abs=1e-12)


def test_nll_against_permutation_determinant():
    K = np.array([[2.0, 1.0], [1.0, 2.0]])
    Sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
    trace = sum(Sigma[i, j] * K[j, i] for i in range(2) for j in range(2))
    expected = -np.log(det_by_permutations(K)) + trace
    assert expected == pytest.approx(5 - np.log(3), abs=1e-15)  # 3.9013877113318902
    assert neg_log_likelihood(K, Sigma) == pytest.approx(expected, abs=1e-13)


def test_nll_random_against_permutation_determinant(rng):
    for _ in range(10):
        d = int(rng.integers(1, 5))
        K = random_spd(rng, d)
        S = random_spd(rng, d)
        tr = sum(S[i, j] * K[j, i] for i in range(d) for j in range(d))
        assert neg_log_likelihood(K, S) == pytest.approx(-np.log(det_by_permutations(K)) + tr,
                                                         rel=1e-11)


def test_nll_non_pd_raises():
    with pytest.raises(NotPositiveDefiniteError):
        neg_log_likelihood(np.array([[1.0, 2.0], [2.0, 1.0]]), np.eye(2))


def test_nll_convex_along_segments(rng):
    for _ in range(50):
        d = int(rng.integers(1, 6))
        K1, K2, S = random_spd(rng, d), random_spd(rng, d), random_spd(rng, d)
        t = rng.uniform(0.01, 0.99)
        lhs = neg_log_likelihood(t * K1 + (1 - t) * K2, S)
        rhs = t * neg_log_likelihood(K1, S) + (1 - t) * neg_log_likelihood(K2, S)
        assert lhs <= rhs + 1e-10


def test_marginal_precision_no_coupling():
    K = PartitionedPrecision(np.diag([2.0, 3.0]), np.zeros((2, 1)), np.eye(1))
    S, L = marginal_precision(K)
    np.testing.assert_array_equal(S, np.diag([2.0, 3.0]))
    np.testing.assert_array_equal(L, 0)


def test_marginal_precision_substitution():
    K = PartitionedPrecision(np.diag([3.0, 3.0]), np.array([[1.0], [1.0]]), np.eye(1))
    S, L = marginal_precision(K)
    np.testing.assert_allclose(S, np.diag([3.0, 3.0]))
    np.testing.assert_allclose(L, [[1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(S - L, [[2.0, -1.0], [-1.0, 2.0]])


def test_marginal_precision_schur_identity(rng):
    for _ in range(100):
        p, kappa = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        Kfull = random_spd(rng, p + kappa)
        K = PartitionedPrecision.from_full(Kfull, p)
        S, L = marginal_precision(K)
        observed_cov = np.linalg.inv(Kfull)[:p, :p]
        inv_SL = np.linalg.inv(S - L)
        assert np.linalg.norm(inv_SL - observed_cov) <= 1e-8 * np.linalg.norm(observed_cov)
        assert numerical_rank(L, 1e-8) <= kappa


def test_marginal_precision_singular_hidden_block():
    K = PartitionedPrecision(np.eye(2), np.ones((2, 1)), np.zeros((1, 1)))
    with pytest.raises(NumericalError):
        marginal_precision(K)


def test_penalty_spec_matrix():
    P = PenaltySpec(0.3).matrix(3)
    np.testing.assert_array_equal(np.diag(P), 0)
    assert P[0, 1] == 0.3
    assert np.all(np.diag(PenaltySpec(0.3, penalize_diagonal=True).matrix(3)) == 0.3)
    W = np.array([[0, 1.0], [1.0, 0]])
    np.testing.assert_array_equal(PenaltySpec(0.0, weights=W).matrix(2), W)
    with pytest.raises(ValueError):
        PenaltySpec(-1.0)
    with pytest.raises(ValueError):
        PenaltySpec(0.1, weights=-W)
