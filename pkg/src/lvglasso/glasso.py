"""Graphical lasso with an entrywise penalty matrix.

Block coordinate descent over columns of the working covariance ``W``, each
column solved by lasso coordinate descent (Friedman, Hastie & Tibshirani).
The penalty is a full matrix so that individual blocks (e.g. everything that
touches hidden variables) can be left unpenalized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit
from scipy import linalg

from .core import (ConfigError, DataError, NumericalError, as_covariance,
                   cholesky_or_raise, is_pd, penalty_matrix, symmetrize)


def soft_threshold(x, t):
    """sign(x) * max(|x| - t, 0); works elementwise on arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


@njit(cache=True)
def _soft(x, t):
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


@njit(cache=True)
def _glasso_bcd(S, P, W, B, tol, max_sweeps, inner_tol, inner_max):
    # W: working covariance, updated in place. B[:, c] holds the lasso
    # coefficients of column c (B[c, c] unused).
    d = S.shape[0]
    scale = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                scale += abs(S[i, j])
    if d > 1:
        scale /= d * (d - 1)
    if scale <= 0.0:
        scale = 1.0
    Wb = np.zeros(d)
    sweeps = 0
    converged = False
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        change = 0.0
        for c in range(d):
            for j in range(d):
                Wb[j] = 0.0
            for k in range(d):
                if k != c and B[k, c] != 0.0:
                    bk = B[k, c]
                    for j in range(d):
                        Wb[j] += W[j, k] * bk
            for it in range(inner_max):
                maxdelta = 0.0
                for j in range(d):
                    if j == c:
                        continue
                    old = B[j, c]
                    wjj = W[j, j]
                    r = S[j, c] - Wb[j] + wjj * old
                    new = _soft(r, P[j, c]) / wjj
                    if new != old:
                        delta = new - old
                        B[j, c] = new
                        for k in range(d):
                            Wb[k] += W[k, j] * delta
                        ad = abs(delta) * wjj
                        if ad > maxdelta:
                            maxdelta = ad
                if maxdelta <= inner_tol:
                    break
            for j in range(d):
                if j != c:
                    change += abs(Wb[j] - W[j, c])
                    W[j, c] = Wb[j]
                    W[c, j] = Wb[j]
        if d > 1:
            change /= d * (d - 1)
        if change <= tol * scale:
            converged = True
            break
    return sweeps, converged


def _precision_from_coefs(W: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = W.shape[0]
    K = np.zeros((d, d))
    for c in range(d):
        beta = B[:, c].copy()
        beta[c] = 0.0
        denom = W[c, c] - W[:, c] @ beta
        if not denom > 0:
            raise NumericalError(f"non-positive Schur complement in column {c}")
        kcc = 1.0 / denom
        K[:, c] = -beta * kcc
        K[c, c] = kcc
    # a pair is zero if either column's lasso zeroed it
    zero = (K == 0) | (K.T == 0)
    K = (K + K.T) / 2
    K[zero] = 0.0
    return K


@dataclass
class GlassoProblem:
    Sigma: np.ndarray
    penalty: np.ndarray
    tol: float = 1e-6
    max_sweeps: int = 200

    def __post_init__(self):
        self.Sigma = as_covariance(self.Sigma)
        d = self.Sigma.shape[0]
        P = np.asarray(self.penalty, dtype=float)
        if P.ndim == 0:
            P = penalty_matrix(d, float(P))
        P = symmetrize(P, "penalty")
        if P.shape != (d, d):
            raise DataError(f"penalty shape {P.shape} does not match Sigma {self.Sigma.shape}")
        if np.any(P < 0):
            raise ConfigError("penalty entries must be nonnegative")
        self.penalty = P
        if not self.tol > 0 or self.max_sweeps < 1:
            raise ConfigError("tol must be positive and max_sweeps >= 1")

    @property
    def dim(self) -> int:
        return self.Sigma.shape[0]


@dataclass
class GlassoSolution:
    K: np.ndarray
    W: np.ndarray
    sweeps_used: int
    converged: bool
    coefs: Optional[np.ndarray] = field(default=None, repr=False)


def glasso_objective(K, Sigma, penalty) -> float:
    """-log det K + tr(Sigma K) + sum_ij penalty_ij |K_ij|."""
    C = cholesky_or_raise(np.asarray(K, dtype=float))
    return (-2.0 * float(np.sum(np.log(np.diag(C)))) + float(np.sum(Sigma * K))
            + float(np.sum(penalty * np.abs(K))))


def solve_glasso(problem: GlassoProblem, init: Optional[GlassoSolution] = None,
                 inner_tol: Optional[float] = None, inner_max: int = 1000,
                 kkt_eps: Optional[float] = 1e-6) -> GlassoSolution:
    """Minimize -log det K + tr(Sigma K) + sum_ij Lambda_ij |K_ij| over PD K.

    ``init`` warm-starts the column coefficients and off-diagonal working
    covariance from an earlier solution of the same dimension. A run that
    exhausts ``max_sweeps`` comes back with ``converged=False``.

    Sweeps stop once the mean absolute change of the off-diagonal working
    covariance falls below ``tol`` times the mean off-diagonal ``|Sigma|``.
    If the optimality residual then still exceeds ``kkt_eps``, sweeping
    resumes with a tighter tolerance (``kkt_eps=None`` disables this).
    """
    S = problem.Sigma
    P = problem.penalty
    d = problem.dim
    if not np.any(P):
        # unpenalized MLE
        C = cholesky_or_raise(S, "Sigma (unpenalized problem)")
        K = linalg.cho_solve((C, True), np.eye(d))
        K = (K + K.T) / 2
        return GlassoSolution(K, S.copy(), 0, True)

    diag = np.diag(S) + np.diag(P)
    if np.any(diag <= 0):
        raise NumericalError("Sigma + diag(penalty) has a non-positive diagonal entry")
    if init is not None and init.coefs is not None and init.W.shape == (d, d):
        W = init.W.copy()
        B = init.coefs.copy()
        np.fill_diagonal(W, diag)
        if not is_pd(W):
            W = S.copy()
            np.fill_diagonal(W, diag)
    else:
        W = S.copy()
        np.fill_diagonal(W, diag)
        B = np.zeros((d, d))
    if inner_tol is None:
        inner_tol = min(1e-12, problem.tol * 1e-4) * max(1.0, float(np.max(np.abs(S))))
    W = np.ascontiguousarray(W)
    B = np.ascontiguousarray(B)
    Sc = np.ascontiguousarray(S)
    Pc = np.ascontiguousarray(P)
    tol = float(problem.tol)
    sweeps = 0
    while True:
        used, converged = _glasso_bcd(Sc, Pc, W, B, tol, int(problem.max_sweeps) - sweeps,
                                      float(inner_tol), int(inner_max))
        sweeps += used
        if not np.all(np.isfinite(W)) or not is_pd(W):
            if init is not None:
                # a stale warm start can push coordinate descent off the PD cone
                return solve_glasso(problem, None, inner_tol, inner_max, kkt_eps)
            raise NumericalError("working covariance diverged")
        try:
            K = _precision_from_coefs(W, B)
        except NumericalError:
            K = None
        if K is None or not is_pd(K):
            if converged:
                raise NumericalError("graphical lasso produced a non-positive-definite precision")
            # unfinished run: the coefficients lag W, so report inv(W) instead
            C = cholesky_or_raise(W, "working covariance")
            K = linalg.cho_solve((C, True), np.eye(d))
            K = (K + K.T) / 2
        if not converged or kkt_eps is None:
            break
        # the W-change rule can stop early on ill-conditioned problems
        if _kkt_residual(K, S, P) <= kkt_eps or sweeps >= problem.max_sweeps or tol < 1e-15:
            break
        tol /= 100.0
        converged = False
    return GlassoSolution(K, W, int(sweeps), bool(converged), B)


def _kkt_residual(K, Sigma, P) -> float:
    C = cholesky_or_raise(K)
    G = linalg.cho_solve((C, True), np.eye(K.shape[0])) - Sigma
    bound = np.max(np.abs(G) - P)
    stat = np.max(np.where(K != 0, np.abs(G - P * np.sign(K)), 0.0))
    return float(max(bound, stat))


@dataclass
class KktReport:
    violations: list
    max_stationarity: float
    max_bound: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_kkt(solution: GlassoSolution, problem: GlassoProblem, eps: float = 1e-5) -> KktReport:
    """Check the optimality conditions with G = K^{-1} - Sigma.

    Every entry needs ``|G_ij| <= Lambda_ij + eps``, and every nonzero entry
    needs ``|G_ij - Lambda_ij sign(K_ij)| <= eps``. An empty violation list
    certifies optimality at ``eps``.
    """
    K = np.asarray(solution.K, dtype=float)
    if K.shape != problem.Sigma.shape:
        raise DataError(f"solution shape {K.shape} does not match problem {problem.Sigma.shape}")
    C = cholesky_or_raise(K)
    G = linalg.cho_solve((C, True), np.eye(K.shape[0])) - problem.Sigma
    P = problem.penalty
    violations = []
    bound = np.abs(G) - P
    stat = np.where(K != 0, np.abs(G - P * np.sign(K)), 0.0)
    for i, j in zip(*np.nonzero(bound > eps)):
        if i <= j:
            violations.append((int(i), int(j), "bound", float(bound[i, j])))
    for i, j in zip(*np.nonzero(stat > eps)):
        if i <= j:
            violations.append((int(i), int(j), "stationarity", float(stat[i, j])))
    return KktReport(violations, float(stat.max(initial=0.0)), float(bound.max(initial=-np.inf)))


def lambda_max(Sigma: np.ndarray) -> float:
    """Smallest uniform off-diagonal penalty that leaves the graph empty."""
    Sigma = np.asarray(Sigma, dtype=float)
    off = np.abs(Sigma - np.diag(np.diag(Sigma)))
    return float(off.max(initial=0.0))


def glasso_path(Sigma, lambdas: Sequence[float], penalize_diagonal: bool = False,
                tol: float = 1e-6, max_sweeps: int = 200) -> list:
    """Warm-started solutions for a strictly descending sequence of penalties."""
    lambdas = [float(x) for x in lambdas]
    if any(x < 0 for x in lambdas):
        raise ConfigError("penalties must be nonnegative")
    if any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise ConfigError("penalties must be strictly descending")
    Sigma = as_covariance(Sigma)
    d = Sigma.shape[0]
    out = []
    prev = None
    for lam in lambdas:
        prob = GlassoProblem(Sigma, penalty_matrix(d, lam, penalize_diagonal), tol, max_sweeps)
        try:
            sol = solve_glasso(prob, init=prev)
        except NumericalError as exc:
            raise NumericalError(f"graphical lasso failed at lambda={lam:g}: {exc}") from exc
        out.append(sol)
        prev = sol
    return out
