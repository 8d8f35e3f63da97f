"""Uniform entry point over the three estimators, plus lambda calibration."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import ConfigError, NumericalError, SparseLowRankEstimate, as_covariance, penalty_matrix
from .glasso import GlassoProblem, lambda_max, solve_glasso
from .graphstats import extract_graph
from .latent_em import EmConfig, fit_em, marginal_objective
from .nuclear_admm import NuclearProblem, solve_nuclear

log = logging.getLogger(__name__)

METHODS = ("em", "nuclear", "glasso")


@dataclass(frozen=True)
class FitSpec:
    method: str
    lam: float
    kappa: Optional[int] = None
    gamma: Optional[float] = None
    iterations: int = 4
    penalize_diagonal: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method == "em" and self.kappa is None:
            raise ConfigError("method 'em' requires kappa")
        if self.method == "nuclear" and self.gamma is None:
            raise ConfigError("method 'nuclear' requires gamma")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")

    def with_lam(self, lam: float) -> "FitSpec":
        return dataclasses.replace(self, lam=float(lam))

    def params(self) -> dict:
        d = dict(lam=self.lam, penalize_diagonal=self.penalize_diagonal)
        if self.method == "em":
            d.update(kappa=self.kappa, iterations=self.iterations)
        if self.method == "nuclear":
            d.update(gamma=self.gamma)
        return d


def fit(Sigma, spec: Union[FitSpec, EmConfig, NuclearProblem]) -> SparseLowRankEstimate:
    """Fit with any supported configuration type; returns (S, L) and trace."""
    if isinstance(spec, EmConfig):
        return fit_em(Sigma, spec)[0]
    if isinstance(spec, NuclearProblem):
        return solve_nuclear(dataclasses.replace(spec, Sigma=Sigma))
    Sigma = as_covariance(Sigma)
    p = Sigma.shape[0]
    if spec.method == "em":
        return fit_em(Sigma, EmConfig(spec.kappa, spec.lam, spec.iterations,
                                      penalize_diagonal=spec.penalize_diagonal))[0]
    if spec.method == "nuclear":
        return solve_nuclear(NuclearProblem(Sigma, spec.lam, spec.gamma, spec.penalize_diagonal))
    sol = solve_glasso(GlassoProblem(Sigma, penalty_matrix(p, spec.lam, spec.penalize_diagonal)))
    L = np.zeros((p, p))
    obj = marginal_objective(sol.K, L, Sigma, spec.lam, spec.penalize_diagonal)
    return SparseLowRankEstimate(sol.K, L, [obj], dict(method="glasso", lam=spec.lam,
                                                       sweeps=sol.sweeps_used,
                                                       converged=sol.converged))


@dataclass
class Calibration:
    lam: float
    fit: SparseLowRankEstimate
    edges: int
    target: int
    exact: bool
    bracket: Optional[tuple] = None  # ((lam_lo, edges_lo), (lam_hi, edges_hi))
    steps: int = 0


def calibrate_lambda(Sigma, spec: FitSpec, target_edges: int, max_steps: int = 50,
                     zero_tol: float = 1e-8) -> Calibration:
    """Bisect lambda until the fitted graph has ``target_edges`` edges.

    Edge counts need not hit every integer; when the target is skipped the
    closest count is returned with ``exact=False`` and the final bracket.
    """
    Sigma = as_covariance(Sigma)
    p = Sigma.shape[0]
    if not 0 <= target_edges <= p * (p - 1) // 2:
        raise ConfigError(f"target_edges must be in [0, {p * (p - 1) // 2}]")

    def run(lam):
        est = fit(Sigma, spec.with_lam(lam))
        return est, extract_graph(est.S, zero_tol).n_edges

    hi = lambda_max(Sigma)
    if spec.method == "nuclear" and spec.gamma:
        hi /= spec.gamma
    hi = max(hi, 1e-12)
    fit_hi, e_hi = run(hi)
    grow = 0
    while e_hi > target_edges and grow < 20:
        hi *= 2
        fit_hi, e_hi = run(hi)
        grow += 1
    if e_hi == target_edges:
        return Calibration(hi, fit_hi, e_hi, target_edges, True, steps=grow)
    lo = 0.0
    try:
        fit_lo, e_lo = run(lo)
    except NumericalError:
        # unpenalized fit needs Sigma PD; start the bracket slightly above zero
        lo = 1e-6 * hi
        fit_lo, e_lo = run(lo)
    if e_lo == target_edges:
        return Calibration(lo, fit_lo, e_lo, target_edges, True, steps=grow)
    if e_lo < target_edges or e_hi > target_edges:
        best = (lo, fit_lo, e_lo) if abs(e_lo - target_edges) <= abs(e_hi - target_edges) \
            else (hi, fit_hi, e_hi)
        log.warning("target of %d edges outside reachable range [%d, %d]",
                    target_edges, e_hi, e_lo)
        return Calibration(best[0], best[1], best[2], target_edges, False,
                           ((lo, e_lo), (hi, e_hi)), grow)
    steps = 0
    for steps in range(1, max_steps + 1):
        mid = 0.5 * (lo + hi)
        fit_mid, e_mid = run(mid)
        if e_mid == target_edges:
            return Calibration(mid, fit_mid, e_mid, target_edges, True,
                               ((lo, e_lo), (hi, e_hi)), steps)
        if e_mid > target_edges:
            lo, fit_lo, e_lo = mid, fit_mid, e_mid
        else:
            hi, fit_hi, e_hi = mid, fit_mid, e_mid
    if abs(e_lo - target_edges) <= abs(e_hi - target_edges):
        lam, best, e = lo, fit_lo, e_lo
    else:
        lam, best, e = hi, fit_hi, e_hi
    log.warning("no lambda gives exactly %d edges; closest %d (bracket %d..%d)",
                target_edges, e, e_lo, e_hi)
    return Calibration(lam, best, e, target_edges, False, ((lo, e_lo), (hi, e_hi)), steps)
