"""Sparse Gaussian graphical models with latent variables.

Rank-constrained penalized EM (graphical lasso M-steps), the convex
l1 + trace estimator via ADMM, bootstrap stability selection and graph
comparison statistics.
"""
from .core import (ConfigError, DataError, DataMatrix, NotPositiveDefiniteError,
                   NumericalError, PartitionedPrecision, PenaltySpec,
                   SparseLowRankEstimate, empirical_covariance, marginal_precision,
                   neg_log_likelihood)
from .glasso import (GlassoProblem, GlassoSolution, check_kkt, glasso_path,
                     soft_threshold, solve_glasso)
from .graphstats import (GraphEstimate, edge_overlap, extract_graph, graph_summary,
                         maximal_cliques, top_pairs)
from .latent_em import (EmConfig, EmTrace, build_imputed_covariance, em_step, fit_em,
                        init_pca, marginal_objective)
from .methods import FitSpec, calibrate_lambda, fit
from .nuclear_admm import NuclearProblem, prox_trace_psd, solve_nuclear
from .stability import (EdgeFrequencyTable, StabilityConfig, bootstrap_edge_frequencies,
                        stable_graph)
from .synthetic import generate_synthetic

__version__ = "0.1.0"
