"""Rank aggregation under rank-dependent coarsening."""

from .core import (
    ComparisonMatrix,
    DataError,
    Ordering,
    PairwisePreference,
    ProbabilityMatrix,
    RankCoarseError,
    Ranking,
    UndefinedPolicy,
    build_comparison_matrix,
    kendall_distance,
    normalized_kendall_distance,
    to_probability_matrix,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComparisonMatrix",
    "DataError",
    "Ordering",
    "PairwisePreference",
    "ProbabilityMatrix",
    "RankCoarseError",
    "Ranking",
    "UndefinedPolicy",
    "build_comparison_matrix",
    "kendall_distance",
    "normalized_kendall_distance",
    "to_probability_matrix",
]
