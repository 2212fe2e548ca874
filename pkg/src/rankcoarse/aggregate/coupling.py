"""Pairwise coupling estimators: Hastie-Tibshirani, Price et al., Wu et al. (WU2)."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..core import ComparisonMatrix, ProbabilityMatrix, to_probability_matrix
from .base import EstimationError

HT_TOL = 1e-10
HT_MAX_ITER = 100_000


def ht_coupling(
    c: ComparisonMatrix, tol: float = HT_TOL, max_iter: int = HT_MAX_ITER, return_trace: bool = False
):
    """Probability vector minimising the count-weighted KL distance to p̂.

    Coordinate-wise fixed-point updates with renormalisation; stops once the
    objective decreases by less than ``tol``. With ``return_trace`` the
    objective after every sweep is returned as well.
    """
    counts = np.asarray(c.counts, dtype=float)
    n = counts + counts.T
    K = c.K
    isolated = np.flatnonzero(n.sum(axis=1) == 0)
    if K > 1 and isolated.size:
        raise EstimationError(f"HT: items {list(isolated + 1)} appear in no comparison")
    p_hat = to_probability_matrix(c)
    r = np.where(p_hat.defined, p_hat.probs, 0.0)
    p, _, _, trace = kernels.ht_fixed_point(n, r, np.full(K, 1.0 / K), tol, max_iter)
    p = np.asarray(p)
    return (p, np.asarray(trace)) if return_trace else p


def price(p: ProbabilityMatrix) -> np.ndarray:
    """theta_i = 1 / (sum_{j != i} 1/p_ij - (K - 2)); needs every p_ij > 0."""
    K = p.K
    probs = np.asarray(p.probs)
    off = ~np.eye(K, dtype=bool)
    if (probs[off] <= 0).any():
        raise EstimationError("Price: some p̂_ij = 0, the estimate is undefined")
    inv = np.where(off, 1.0 / np.where(off, probs, 1.0), 0.0).sum(axis=1)
    denom = inv - (K - 2)
    return 1.0 / denom


def wu2_matrix(p: ProbabilityMatrix) -> np.ndarray:
    """Off-diagonal -p_ij p_ji, diagonal sum_{s != i} p_si^2."""
    P = np.array(p.probs)
    np.fill_diagonal(P, 0.0)
    Q = -P * P.T
    np.fill_diagonal(Q, (P**2).sum(axis=0))
    return Q


def wu2(p: ProbabilityMatrix) -> np.ndarray:
    """Minimiser of theta' Q theta subject to sum(theta) = 1, from the Lagrangian system.

    Components may come out negative; only their order is used for ranking.
    """
    K = p.K
    Q = wu2_matrix(p)
    A = np.zeros((K + 1, K + 1))
    A[:K, :K] = 2.0 * Q
    A[:K, K] = 1.0
    A[K, :K] = 1.0
    b = np.zeros(K + 1)
    b[K] = 1.0
    if np.linalg.cond(A) > 1e12:
        raise EstimationError("WU2: singular Lagrangian system")
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise EstimationError("WU2: singular Lagrangian system") from None
    return sol[:K]
