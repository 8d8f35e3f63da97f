"""Shared types, covariance construction and Gaussian objectives."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

SYM_TOL = 1e-9


class DataError(ValueError):
    """Input data is malformed or unusable."""


class DegenerateColumnError(DataError):
    pass


class ConfigError(ValueError):
    """Invalid combination of parameters."""


class NumericalError(ArithmeticError):
    """A numerical routine failed (non-PD matrix, singular block, ...)."""


class NotPositiveDefiniteError(NumericalError):
    pass


@dataclass(frozen=True)
class DataMatrix:
    """n x p observations of the observed variables, with column labels."""

    values: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.values, dtype=float)
        if X.ndim != 2:
            raise DataError(f"data must be 2-dimensional, got shape {X.shape}")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 rows and p >= 1 columns, got {n} x {p}")
        if not np.all(np.isfinite(X)):
            raise DataError("data contains non-finite values")
        labels = tuple(self.labels) if len(self.labels) else tuple(f"V{j}" for j in range(p))
        if len(labels) != p:
            raise DataError(f"{len(labels)} labels for {p} columns")
        X.setflags(write=False)
        object.__setattr__(self, "values", X)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def symmetrize(A, name: str = "matrix", tol: float = SYM_TOL) -> np.ndarray:
    """Return (A + A^T)/2, refusing matrices that are not symmetric up to roundoff."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DataError(f"{name} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym > tol * scale:
        raise DataError(f"{name} is not symmetric (max asymmetry {asym:.3g})")
    return (A + A.T) / 2


def as_covariance(Sigma, name: str = "Sigma") -> np.ndarray:
    """Validate a covariance matrix: symmetric and PSD up to roundoff."""
    S = symmetrize(Sigma, name)
    if not np.all(np.isfinite(S)):
        raise DataError(f"{name} contains non-finite values")
    ev = linalg.eigvalsh(S)
    if ev.size and ev[0] < -1e-10 * max(ev[-1], 0.0) - 1e-300:
        raise DataError(f"{name} is not positive semidefinite (min eigenvalue {ev[0]:.3g})")
    return S


def empirical_covariance(data, center: bool = True, standardize: bool = False,
                         divisor: str = "n") -> np.ndarray:
    """Empirical covariance ``X~^T X~ / divisor`` of a data matrix.

    Parameters
    ----------
    data : DataMatrix or array_like, shape (n, p)
    center : bool
        Subtract column means first.
    standardize : bool
        Scale columns to unit variance (under the chosen divisor), so the
        result has a unit diagonal.
    divisor : {"n", "n-1"}
    """
    X = data.values if isinstance(data, DataMatrix) else DataMatrix(data).values
    n = X.shape[0]
    if divisor == "n":
        denom = n
    elif divisor in ("n-1", "n - 1"):
        denom = n - 1
    else:
        raise ConfigError(f"divisor must be 'n' or 'n-1', got {divisor!r}")
    Xt = X - X.mean(axis=0) if center else X.copy()
    if standardize:
        sd = np.sqrt(np.sum(Xt ** 2, axis=0) / denom)
        bad = np.flatnonzero(sd <= 1e-12 * max(1.0, float(np.max(np.abs(X)))))
        if bad.size:
            labels = data.labels if isinstance(data, DataMatrix) else None
            name = labels[bad[0]] if labels else str(bad[0])
            raise DegenerateColumnError(f"column {name} has zero variance; cannot standardize")
        Xt = Xt / sd
    C = Xt.T @ Xt / denom
    C = (C + C.T) / 2
    if standardize:
        np.fill_diagonal(C, 1.0)
    return C


def cholesky_or_raise(K: np.ndarray, what: str = "K") -> np.ndarray:
    try:
        return linalg.cholesky(K, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{what} is not positive definite") from exc


def logdet_pd(K: np.ndarray, what: str = "K") -> float:
    C = cholesky_or_raise(K, what)
    return 2.0 * float(np.sum(np.log(np.diag(C))))


def neg_log_likelihood(K, Sigma) -> float:
    """-log det K + tr(Sigma K): per-observation Gaussian loss, constants dropped."""
    K = np.asarray(K, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)
    if K.shape != Sigma.shape:
        raise DataError(f"shape mismatch: K {K.shape} vs Sigma {Sigma.shape}")
    return -logdet_pd(K) + float(np.sum(Sigma * K))


def l1_norm(S: np.ndarray, penalize_diagonal: bool, weights: Optional[np.ndarray] = None) -> float:
    A = np.abs(S) if weights is None else np.abs(S) * weights
    total = float(np.sum(A))
    if not penalize_diagonal:
        total -= float(np.sum(np.diag(A)))
    return total


@dataclass(frozen=True)
class PenaltySpec:
    """Entrywise l1 weights: ``lam`` everywhere (or ``weights``), diagonal per policy.

    ``gamma`` is only consulted by the nuclear-norm solver.
    """

    lam: float
    gamma: float = 1.0
    penalize_diagonal: bool = False
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.lam < 0 or self.gamma < 0:
            raise ConfigError("lambda and gamma must be nonnegative")
        if self.weights is not None:
            w = symmetrize(self.weights, "penalty weights")
            if np.any(w < 0):
                raise ConfigError("penalty weights must be nonnegative")
            object.__setattr__(self, "weights", w)

    def matrix(self, p: int) -> np.ndarray:
        if self.weights is not None:
            if self.weights.shape != (p, p):
                raise ConfigError(f"weights shape {self.weights.shape} != ({p}, {p})")
            P = self.weights.copy()
        else:
            P = np.full((p, p), float(self.lam))
        if not self.penalize_diagonal:
            np.fill_diagonal(P, 0.0)
        return P


def penalty_matrix(p: int, lam: float, penalize_diagonal: bool = False) -> np.ndarray:
    return PenaltySpec(lam, penalize_diagonal=penalize_diagonal).matrix(p)


@dataclass
class PartitionedPrecision:
    """Joint concentration matrix of (observed, hidden) in block form."""

    K_O: np.ndarray
    K_OH: np.ndarray
    K_H: np.ndarray

    def __post_init__(self):
        self.K_O = np.asarray(self.K_O, dtype=float)
        p = self.K_O.shape[0]
        self.K_OH = np.asarray(self.K_OH, dtype=float).reshape(p, -1)
        kappa = self.K_OH.shape[1]
        self.K_H = np.asarray(self.K_H, dtype=float).reshape(kappa, kappa)

    @property
    def p(self) -> int:
        return self.K_O.shape[0]

    @property
    def kappa(self) -> int:
        return self.K_OH.shape[1]

    def full(self) -> np.ndarray:
        return np.block([[self.K_O, self.K_OH], [self.K_OH.T, self.K_H]])

    @classmethod
    def from_full(cls, K: np.ndarray, p: int) -> "PartitionedPrecision":
        return cls(K[:p, :p].copy(), K[:p, p:].copy(), K[p:, p:].copy())


def marginal_precision(K: PartitionedPrecision):
    """Split the marginal concentration of X_O as S - L.

    Returns ``S = K_O`` and ``L = K_OH K_H^{-1} K_HO`` (the Schur complement
    correction), so ``S - L`` is the concentration of the observed block.
    """
    S = K.K_O.copy()
    if K.kappa == 0:
        return S, np.zeros_like(S)
    try:
        C = linalg.cholesky(K.K_H, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError("hidden block K_H is singular or not positive definite") from exc
    F = linalg.solve_triangular(C, K.K_OH.T, lower=True)
    L = F.T @ F
    return S, (L + L.T) / 2


@dataclass
class SparseLowRankEstimate:
    """Sparse component S (= K_O) and PSD low-rank component L; S - L is PD."""

    S: np.ndarray
    L: np.ndarray
    objective_trace: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def precision(self) -> np.ndarray:
        return self.S - self.L


def numerical_rank(A: np.ndarray, rtol: float = 1e-8) -> int:
    s = linalg.svdvals(A)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def is_pd(A: np.ndarray) -> bool:
    try:
        linalg.cholesky(A, lower=True)
        return True
    except linalg.LinAlgError:
        return False


def permute(A: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    perm = np.asarray(perm)
    return A[np.ix_(perm, perm)]
