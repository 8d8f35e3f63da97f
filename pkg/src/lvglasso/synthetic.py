"""Sparse-minus-low-rank Gaussian benchmark models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import ConfigError, DataMatrix, NumericalError, is_pd


@dataclass
class SyntheticModel:
    data: DataMatrix
    S_true: np.ndarray
    L_true: np.ndarray

    @property
    def covariance(self) -> np.ndarray:
        """Population covariance (S* - L*)^{-1}."""
        C = linalg.inv(self.S_true - self.L_true)
        return (C + C.T) / 2

    @property
    def support(self) -> np.ndarray:
        A = self.S_true != 0
        np.fill_diagonal(A, False)
        return A


def generate_synthetic(p: int, kappa: int, edge_prob: float, n: int, seed: int = 0,
                       edge_range=(0.3, 0.6), latent_scale: float = 1.5,
                       margin: float = 0.5) -> SyntheticModel:
    """Draw a sparse S*, a rank-``kappa`` L* = B B^T and n samples from N(0, (S* - L*)^{-1}).

    Off-diagonal pairs enter S* independently with probability ``edge_prob``
    with magnitudes uniform on ``edge_range`` and random sign. B has Gaussian
    entries of size ``latent_scale / sqrt(p)``. The diagonal of S* is a
    common constant large enough that the smallest eigenvalue of S* - L* is
    at least ``margin`` (and at least 1).
    """
    if p < 2 or not 0 <= kappa < p or not 0 < edge_prob < 1 or n < 2:
        raise ConfigError("need p >= 2, 0 <= kappa < p, 0 < edge_prob < 1, n >= 2")
    rng = np.random.default_rng(seed)
    mask = np.triu(rng.random((p, p)) < edge_prob, 1)
    vals = rng.uniform(*edge_range, size=(p, p)) * rng.choice([-1.0, 1.0], size=(p, p))
    off = np.where(mask, vals, 0.0)
    off = off + off.T
    B = rng.standard_normal((p, kappa)) * latent_scale / np.sqrt(p)
    L = B @ B.T
    for _ in range(5):
        shift = -linalg.eigvalsh(off - L)[0] + margin
        diag = max(1.0, shift)
        S = off + diag * np.eye(p)
        if is_pd(S - L) and linalg.eigvalsh(S - L)[0] >= margin * (1 - 1e-9):
            break
        margin *= 2
    else:
        raise NumericalError("could not construct a positive definite S* - L*")
    cov = linalg.inv(S - L)
    cov = (cov + cov.T) / 2
    X = rng.multivariate_normal(np.zeros(p), cov, size=n, method="cholesky")
    return SyntheticModel(DataMatrix(X), S, L)
