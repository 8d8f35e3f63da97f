"""Convex sparse-plus-low-rank estimator solved by ADMM.

    minimize  -log det(S - L) + tr(Sigma (S - L)) + lam * (gamma ||S||_1 + tr(L))
    s.t.      S - L > 0,  L >= 0

Variables are split as x = (R, S, L) with separable proximal maps and a copy
z = (R', S', L') constrained to the subspace R' = S' - L'. The x-update is
three closed-form proxes (log-det, soft threshold, eigenvalue shift-and-clip);
the z-update is an orthogonal projection onto the subspace.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import (ConfigError, SparseLowRankEstimate, as_covariance, is_pd,
                   l1_norm, neg_log_likelihood, symmetrize)


@dataclass
class NuclearProblem:
    Sigma: np.ndarray
    lam: float
    gamma: float
    penalize_diagonal: bool = False
    rho: float = 1.0
    tol_primal: float = 1e-7
    tol_dual: float = 1e-7
    max_iters: int = 20000
    adapt_rho: bool = True

    def __post_init__(self):
        self.Sigma = as_covariance(self.Sigma)
        if self.lam < 0 or self.gamma < 0:
            raise ConfigError("lambda and gamma must be nonnegative")
        if not (self.rho > 0 and self.tol_primal > 0 and self.tol_dual > 0):
            raise ConfigError("rho and tolerances must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


def prox_trace_psd(M, t: float) -> np.ndarray:
    """argmin_X 1/2 ||X - M||_F^2 + t tr(X) over PSD X: eigenvalues d -> max(d - t, 0)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    M = symmetrize(M, "M")
    d, V = linalg.eigh(M)
    d = np.maximum(d - t, 0.0)
    X = (V * d) @ V.T
    return (X + X.T) / 2


def prox_logdet(V, Sigma, rho: float) -> np.ndarray:
    """argmin_R -log det R + tr(Sigma R) + rho/2 ||R - V||_F^2."""
    d, Q = linalg.eigh(rho * V - Sigma)
    r = (d + np.sqrt(d * d + 4.0 * rho)) / (2.0 * rho)
    R = (Q * r) @ Q.T
    return (R + R.T) / 2


def nuclear_objective(S, L, Sigma, lam, gamma, penalize_diagonal=False) -> float:
    return (neg_log_likelihood(S - L, Sigma) + lam * gamma * l1_norm(S, penalize_diagonal)
            + lam * float(np.trace(L)))


def solve_nuclear(problem: NuclearProblem) -> SparseLowRankEstimate:
    """Solve the l1 + trace penalized likelihood by two-block ADMM.

    ``meta`` carries ``converged``, the final residuals and the final rho.
    The returned S has exact zeros from the soft-thresholding step. L is
    PSD by construction.
    """
    Sigma = problem.Sigma
    p = Sigma.shape[0]
    lam, gamma = problem.lam, problem.gamma
    thr = np.full((p, p), lam * gamma)
    if not problem.penalize_diagonal:
        np.fill_diagonal(thr, 0.0)
    rho = problem.rho

    d0 = np.diag(Sigma).copy()
    d0[d0 <= 0] = 1.0
    Rz = np.diag(1.0 / d0)
    Sz = Rz.copy()
    Lz = np.zeros((p, p))
    UR = np.zeros((p, p))
    US = np.zeros((p, p))
    UL = np.zeros((p, p))
    trace = []
    converged = False
    r_norm = s_norm = np.inf
    scale = np.sqrt(3.0) * p
    it = 0
    for it in range(1, problem.max_iters + 1):
        R = prox_logdet(Rz - UR, Sigma, rho)
        A = Sz - US
        S = np.sign(A) * np.maximum(np.abs(A) - thr / rho, 0.0)
        L = prox_trace_psd(Lz - UL, lam / rho)

        a, b, c = R + UR, S + US, L + UL
        mu = (a - b + c) / 3.0
        Rz_old, Sz_old, Lz_old = Rz, Sz, Lz
        Rz, Sz, Lz = a - mu, b + mu, c - mu

        UR += R - Rz
        US += S - Sz
        UL += L - Lz

        r_norm = np.sqrt(np.sum((R - Rz) ** 2) + np.sum((S - Sz) ** 2) + np.sum((L - Lz) ** 2))
        s_norm = rho * np.sqrt(np.sum((Rz - Rz_old) ** 2) + np.sum((Sz - Sz_old) ** 2)
                               + np.sum((Lz - Lz_old) ** 2))
        x_norm = np.sqrt(np.sum(R ** 2) + np.sum(S ** 2) + np.sum(L ** 2))
        z_norm = np.sqrt(np.sum(Rz ** 2) + np.sum(Sz ** 2) + np.sum(Lz ** 2))
        u_norm = rho * np.sqrt(np.sum(UR ** 2) + np.sum(US ** 2) + np.sum(UL ** 2))
        eps_pri = scale * problem.tol_primal + problem.tol_primal * max(x_norm, z_norm)
        eps_dual = scale * problem.tol_dual + problem.tol_dual * u_norm

        if it % 10 == 0 or it == 1:
            D = S - L
            if is_pd(D):
                trace.append(nuclear_objective(S, L, Sigma, lam, gamma, problem.penalize_diagonal))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break
        if problem.adapt_rho:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                UR /= 2.0
                US /= 2.0
                UL /= 2.0
            elif s_norm > 10.0 * r_norm:
                rho /= 2.0
                UR *= 2.0
                US *= 2.0
                UL *= 2.0

    S_out = (S + S.T) / 2
    L_out = L
    if not is_pd(S_out - L_out):
        # unconverged iterate: fall back to the feasible combination R + L
        S_out = R + L
    obj = nuclear_objective(S_out, L_out, Sigma, lam, gamma, problem.penalize_diagonal)
    trace.append(obj)
    meta = dict(method="nuclear", lam=lam, gamma=gamma, iterations=it, converged=converged,
                primal_residual=float(r_norm), dual_residual=float(s_norm), rho=rho)
    return SparseLowRankEstimate(S_out, L_out, trace, meta)
