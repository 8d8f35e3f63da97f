"""Bootstrap edge-selection frequencies and the stable-edge graph."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import ConfigError, DataError, DataMatrix, NumericalError, empirical_covariance
from .graphstats import GraphEstimate, extract_graph
from .latent_em import EmConfig
from .methods import FitSpec, fit
from .nuclear_admm import NuclearProblem

log = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.05


@dataclass(frozen=True)
class StabilityConfig:
    replicates: int = 2000
    threshold: float = 0.5
    base_config: Union[EmConfig, NuclearProblem, FitSpec, None] = None
    master_seed: int = 0
    standardize: bool = True
    divisor: str = "n"
    zero_tol: float = 1e-8

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("need at least one bootstrap replicate")
        if not 0 < self.threshold <= 1:
            raise ConfigError("threshold must lie in (0, 1]")
        if self.base_config is None:
            raise ConfigError("base_config is required")


@dataclass
class EdgeFrequencyTable:
    counts: np.ndarray
    B: int
    failures: list = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.counts.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.B


def replicate_rng(master_seed: int, b: int) -> np.random.Generator:
    # keyed on (seed, replicate index) so scheduling order is irrelevant
    return np.random.default_rng([int(master_seed), int(b)])


def _replicate(X: np.ndarray, config: StabilityConfig, b: int):
    rng = replicate_rng(config.master_seed, b)
    idx = rng.integers(0, X.shape[0], size=X.shape[0])
    try:
        Sigma = empirical_covariance(X[idx], standardize=config.standardize,
                                     divisor=config.divisor)
        est = fit(Sigma, config.base_config)
    except (NumericalError, DataError) as exc:
        return b, None, str(exc)
    return b, extract_graph(est.S, config.zero_tol).adjacency, None


def _run_chunk(args):
    X, config, bs = args
    return [_replicate(X, config, b) for b in bs]


def bootstrap_edge_frequencies(data, config: StabilityConfig, n_jobs: int = 1) -> EdgeFrequencyTable:
    """Refit on ``config.replicates`` bootstrap resamples and count selected edges.

    Failed replicates are dropped and listed in ``failures``. ``B`` is the
    number that succeeded. More than 5% failures raises.
    """
    X = data.values if isinstance(data, DataMatrix) else DataMatrix(data).values
    p = X.shape[1]
    reps = list(range(config.replicates))
    if n_jobs == 1:
        results = _run_chunk((X, config, reps))
    else:
        chunks = [reps[k::n_jobs] for k in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = [r for part in pool.map(_run_chunk, [(X, config, c) for c in chunks])
                       for r in part]
    counts = np.zeros((p, p), dtype=np.int64)
    failures = []
    for b, A, err in sorted(results, key=lambda r: r[0]):
        if A is None:
            failures.append((b, err))
            continue
        counts += A
    if len(failures) > MAX_FAILURE_RATE * config.replicates:
        raise NumericalError(f"{len(failures)} of {config.replicates} bootstrap fits failed; "
                             f"first: {failures[0][1]}")
    if failures:
        log.warning("%d bootstrap replicates failed and were excluded", len(failures))
    return EdgeFrequencyTable(counts, config.replicates - len(failures), failures)


def stable_graph(table: EdgeFrequencyTable, threshold: float = 0.5) -> GraphEstimate:
    """Edges selected in strictly more than ``threshold`` of the replicates."""
    A = table.counts > threshold * table.B
    np.fill_diagonal(A, False)
    return GraphEstimate(A, dict(kind="stable", B=table.B, threshold=threshold))
