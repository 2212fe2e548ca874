"""Weighted feedback arc set (linear ordering) by exact subset dynamic programming."""

from __future__ import annotations

import itertools

import numpy as np

from .. import kernels
from ..core import Ranking
from .base import EstimationError

FAS_MAX_K = 20

_SOURCES = ("counts", "relative", "binary")


def fas_weights(weights, source: str = "counts") -> np.ndarray:
    """Edge weights for FAS, FAS(R) (p̂ as given) or FAS(B) (indicator p̂ > 1/2)."""
    if source not in _SOURCES:
        raise ValueError(f"unknown FAS weight source {source!r}; expected one of {_SOURCES}")
    w = np.array(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"FAS weights must be a square matrix, got shape {w.shape}")
    if source == "binary":
        w = (w > 0.5).astype(float)
    np.fill_diagonal(w, 0.0)
    return w


def fas_objective(weights, ranking: Ranking) -> float:
    """Sum of w[j, i] over all pairs with a_i placed before a_j."""
    w = np.asarray(weights, dtype=float)
    r = np.asarray(ranking.ranks)
    before = r[:, None] < r[None, :]
    return float((w.T * before).sum())


def fas_solve(weights, source: str = "counts") -> Ranking:
    """Ranking minimising the total weight of violated preferences.

    Among optimal orderings the lexicographically smallest is returned.
    """
    w = fas_weights(weights, source)
    K = w.shape[0]
    if K > FAS_MAX_K:
        raise EstimationError(f"FAS: exact solver supports K <= {FAS_MAX_K}, got K={K}")
    _, order = kernels.fas_dp(w)
    return Ranking.from_ordering(np.asarray(order) + 1)


def fas_bruteforce(weights, source: str = "counts") -> tuple[float, Ranking]:
    """Exhaustive search over all K! orderings; first optimum in lexicographic order."""
    w = fas_weights(weights, source)
    K = w.shape[0]
    best, best_r = np.inf, None
    tol = 1e-9 * (1.0 + np.abs(w).sum())
    for perm in itertools.permutations(range(1, K + 1)):
        r = Ranking.from_ordering(perm)
        v = fas_objective(w, r)
        if v < best - tol:
            best, best_r = v, r
    return best, best_r
