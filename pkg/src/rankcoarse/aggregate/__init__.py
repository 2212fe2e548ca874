"""Rank aggregation from pairwise comparisons."""

from .base import EstimationError, argsort_desc, snap_scores
from .coupling import ht_coupling, price, wu2, wu2_matrix
from .dispatch import ALL_METHODS, AggregationResult, MethodId, aggregate, aggregate_detailed, parse_methods
from .graph import FAS_MAX_K, fas_bruteforce, fas_objective, fas_solve, fas_weights
from .spectral import (
    TransitionMatrix,
    mc2_matrix,
    mc3_matrix,
    rank_centrality,
    rank_centrality_matrix,
    spectral_mc,
    stationary_distribution,
    wu1,
    wu1_matrix,
)
from .statistical import btl_mle, btl_stationarity_residual, hodgerank_ls, is_strongly_connected, log_odds_matrix
from .voting import borda, copeland

__all__ = [
    "ALL_METHODS",
    "AggregationResult",
    "EstimationError",
    "FAS_MAX_K",
    "MethodId",
    "TransitionMatrix",
    "aggregate",
    "aggregate_detailed",
    "argsort_desc",
    "borda",
    "btl_mle",
    "btl_stationarity_residual",
    "copeland",
    "fas_bruteforce",
    "fas_objective",
    "fas_solve",
    "fas_weights",
    "hodgerank_ls",
    "ht_coupling",
    "is_strongly_connected",
    "log_odds_matrix",
    "mc2_matrix",
    "mc3_matrix",
    "parse_methods",
    "price",
    "rank_centrality",
    "rank_centrality_matrix",
    "snap_scores",
    "spectral_mc",
    "stationary_distribution",
    "wu1",
    "wu1_matrix",
    "wu2",
    "wu2_matrix",
]
