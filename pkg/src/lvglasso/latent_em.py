"""Rank-constrained latent-variable graphical model fitted by penalized EM.

The hidden variables are treated as missing data. Given the current joint
concentration (with ``K_H = I``), the E-step fills in the hidden sufficient
statistics of the joint covariance; the M-step is a graphical lasso on the
``(p + kappa)``-dimensional imputed covariance, penalizing only the observed
block ``K_O``. The marginal concentration of the observed variables is then
``S - L`` with ``S = K_O`` and ``L = K_OH K_OH^T`` of rank at most ``kappa``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .core import (ConfigError, DataError, NumericalError, PartitionedPrecision,
                   SparseLowRankEstimate, as_covariance, l1_norm,
                   marginal_precision, neg_log_likelihood, penalty_matrix)
from .glasso import GlassoProblem, GlassoSolution, glasso_objective, solve_glasso

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-8


@dataclass(frozen=True)
class EmConfig:
    kappa: int
    lam: float
    iterations: int = 4
    stop_tol: Optional[float] = None
    penalize_diagonal: bool = False
    seed: int = 0
    inner_tol: float = 1e-6
    inner_max_sweeps: int = 500

    def __post_init__(self):
        if self.kappa < 0:
            raise ConfigError("kappa must be >= 0")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.iterations < 1:
            raise ConfigError("need at least one EM iteration")


@dataclass
class EmRecord:
    iteration: int
    marginal: float
    complete: float
    glasso_sweeps: int = 0
    glasso_converged: bool = True
    accepted: bool = True


@dataclass
class EmTrace:
    records: list = field(default_factory=list)

    @property
    def marginal(self) -> np.ndarray:
        return np.array([r.marginal for r in self.records])

    def is_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        m = self.marginal
        return bool(np.all(np.diff(m) <= slack))


def marginal_objective(S, L, Sigma, lam: float, penalize_diagonal: bool = False) -> float:
    """-log det(S - L) + tr(Sigma (S - L)) + lam * ||S||_1."""
    return neg_log_likelihood(np.asarray(S) - np.asarray(L), Sigma) + \
        lam * l1_norm(np.asarray(S), penalize_diagonal)


def _sign_fix(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for k in range(V.shape[1]):
        j = int(np.argmax(np.abs(V[:, k])))
        if V[j, k] < 0:
            V[:, k] = -V[:, k]
    return V


def init_pca(Sigma, kappa: int, ridge: float = 1e-8) -> PartitionedPrecision:
    """Starting value from a probabilistic-PCA fit of Sigma.

    The hidden variables are the top-``kappa`` principal factors, rescaled to
    unit conditional variance given X_O so that ``K_H = I``. ``-K_OH`` is then
    the regression of those hidden variables on X_O:
    ``K_OH = -V diag(sqrt(1/s2 - 1/d))`` with ``d`` the leading eigenvalues
    and ``s2`` the mean of the remaining ones. ``K_O`` is chosen so the
    starting marginal ``S - L`` is the ridge inverse ``(Sigma + eps I)^{-1}``.
    """
    Sigma = as_covariance(Sigma)
    p = Sigma.shape[0]
    if kappa < 0 or kappa >= p:
        raise ConfigError(f"need 0 <= kappa < p, got kappa={kappa}, p={p}")
    eps = ridge * max(float(np.trace(Sigma)) / p, 1e-300)
    M = linalg.cho_solve(linalg.cho_factor(Sigma + eps * np.eye(p), lower=True), np.eye(p))
    M = (M + M.T) / 2
    if kappa == 0:
        return PartitionedPrecision(M, np.zeros((p, 0)), np.zeros((0, 0)))
    evals, evecs = linalg.eigh(Sigma)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    tol = 1e-10 * max(evals[0], 0.0)
    if np.sum(evals > tol) < kappa:
        raise DataError(f"Sigma has fewer than kappa={kappa} positive eigenvalues")
    d = evals[:kappa]
    V = _sign_fix(evecs[:, :kappa])
    s2 = float(np.mean(evals[kappa:]))
    s2 = max(s2, eps)
    if np.any(d <= s2 * (1 + 1e-8)):
        warnings.warn("leading eigenvalues not separated from the rest; "
                      "kappa may exceed the effective latent rank", RuntimeWarning)
    strength = np.sqrt(np.maximum(1.0 / s2 - 1.0 / d, 0.0))
    K_OH = -V * strength
    L = K_OH @ K_OH.T
    return PartitionedPrecision(M + L, K_OH, np.eye(kappa))


def build_imputed_covariance(Sigma, K: PartitionedPrecision) -> np.ndarray:
    """Expected complete-data covariance of (X_O, X_H) given X_O under K.

    ``[[Sigma, -Sigma K_OH], [-K_HO Sigma, I + K_HO Sigma K_OH]]``; assumes
    the ``K_H = I`` convention.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    p, kappa = K.p, K.kappa
    if Sigma.shape != (p, p):
        raise DataError(f"Sigma shape {Sigma.shape} does not match K_O ({p}, {p})")
    SB = Sigma @ K.K_OH
    H = np.eye(kappa) + K.K_OH.T @ SB
    W = np.block([[Sigma, -SB], [-SB.T, (H + H.T) / 2]])
    return W


def normalize_hidden(K: PartitionedPrecision) -> PartitionedPrecision:
    """Rescale hidden coordinates so that K_H = I.

    With ``K_H = A^2`` (symmetric square root ``A``), the map ``x_H -> A x_H``
    sends ``K_OH`` to ``K_OH A^{-1}``; ``K_O`` and ``S - L`` are unchanged.
    """
    if K.kappa == 0:
        return K
    evals, evecs = linalg.eigh(K.K_H)
    if evals[0] <= 0:
        raise NumericalError("hidden block K_H is not positive definite")
    A_inv = (evecs / np.sqrt(evals)) @ evecs.T
    return PartitionedPrecision(K.K_O.copy(), K.K_OH @ A_inv, np.eye(K.kappa))


def _em_penalty(p: int, kappa: int, lam: float, penalize_diagonal: bool) -> np.ndarray:
    P = np.zeros((p + kappa, p + kappa))
    P[:p, :p] = penalty_matrix(p, lam, penalize_diagonal)
    return P


def _step(Sigma, K_t: PartitionedPrecision, config: EmConfig, tol: float, warm=None):
    p, kappa = K_t.p, K_t.kappa
    W = build_imputed_covariance(Sigma, K_t)
    P = _em_penalty(p, kappa, config.lam, config.penalize_diagonal)
    prob = GlassoProblem(W, P, tol=tol, max_sweeps=config.inner_max_sweeps)
    sol = solve_glasso(prob, init=warm)
    q_new = glasso_objective(sol.K, W, P)
    q_old = glasso_objective(K_t.full(), W, P)
    # generalized EM: keep the old iterate unless the M-step improves Q
    accepted = q_new <= q_old
    K_new = normalize_hidden(PartitionedPrecision.from_full(sol.K, p)) if accepted else K_t
    return K_new, sol, min(q_new, q_old), accepted


def em_step(Sigma, K_t: PartitionedPrecision, config: EmConfig,
            tol: Optional[float] = None) -> PartitionedPrecision:
    """One EM update: impute W from K_t, solve the penalized M-step, renormalize K_H = I."""
    Sigma = as_covariance(Sigma)
    if K_t.kappa and not np.allclose(K_t.K_H, np.eye(K_t.kappa), atol=1e-10):
        raise ConfigError("em_step expects the K_H = I convention")
    try:
        K_new, *_ = _step(Sigma, K_t, config, config.inner_tol if tol is None else tol)
    except NumericalError as exc:
        raise NumericalError(f"EM M-step failed: {exc}") from exc
    return K_new


def _objective(K: PartitionedPrecision, Sigma, config: EmConfig) -> float:
    S, L = marginal_precision(K)
    return marginal_objective(S, L, Sigma, config.lam, config.penalize_diagonal)


def fit_em(Sigma, config: EmConfig):
    """Fit the rank-``kappa`` latent-variable model by penalized EM.

    Runs ``config.iterations`` EM steps from :func:`init_pca` (stopping early
    once the objective decrease drops below ``config.stop_tol``).

    Returns
    -------
    estimate : SparseLowRankEstimate
        ``S = K_O`` and ``L = K_OH K_OH^T``.
    trace : EmTrace
        Record 0 is the starting value; one record per EM iteration after it.
    """
    Sigma = as_covariance(Sigma)
    p = Sigma.shape[0]
    if config.kappa >= p:
        raise ConfigError(f"kappa={config.kappa} must be < p={p}")
    trace = EmTrace()

    if config.kappa == 0:
        # no hidden variables: every EM step is the same glasso solve
        P = penalty_matrix(p, config.lam, config.penalize_diagonal)
        sol = solve_glasso(GlassoProblem(Sigma, P, tol=config.inner_tol,
                                         max_sweeps=config.inner_max_sweeps))
        S, L = sol.K, np.zeros((p, p))
        f = marginal_objective(S, L, Sigma, config.lam, config.penalize_diagonal)
        trace.records.append(EmRecord(1, f, f, sol.sweeps_used, sol.converged))
        est = SparseLowRankEstimate(S, L, [f], dict(method="em", lam=config.lam, kappa=0,
                                                    iterations=1))
        return est, trace

    K = init_pca(Sigma, config.kappa)
    f_prev = _objective(K, Sigma, config)
    trace.records.append(EmRecord(0, f_prev, float("nan")))
    tol = config.inner_tol
    warm: Optional[GlassoSolution] = None
    iters = 0
    for t in range(1, config.iterations + 1):
        try:
            K, sol, q, accepted = _step(Sigma, K, config, tol, warm)
        except NumericalError as exc:
            raise NumericalError(f"EM iteration {t}: {exc}") from exc
        iters = t
        warm = sol
        f = _objective(K, Sigma, config)
        trace.records.append(EmRecord(t, f, q, sol.sweeps_used, sol.converged, accepted))
        decrease = f_prev - f
        if decrease < -MONOTONE_SLACK:
            raise RuntimeError(f"EM objective increased by {-decrease:.3g} at iteration {t}")
        log.debug("EM iter %d: objective %.10g (decrease %.3g)", t, f, decrease)
        f_prev = f
        if not accepted:
            break
        if config.stop_tol is not None and decrease < config.stop_tol:
            break
        tol = max(min(config.inner_tol, 0.1 * decrease), 1e-10)

    S, L = marginal_precision(K)
    est = SparseLowRankEstimate(S, L, [r.marginal for r in trace.records],
                                dict(method="em", lam=config.lam, kappa=config.kappa,
                                     iterations=iters, K_OH=K.K_OH))
    return est, trace
