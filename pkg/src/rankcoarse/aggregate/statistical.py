"""Likelihood and least-squares estimators: BTL, BTL(R) and HodgeRank."""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import connected_components

from .. import kernels
from ..core import ComparisonMatrix, ProbabilityMatrix, to_probability_matrix
from .base import EstimationError

BTL_TOL = 1e-10
BTL_MAX_ITER = 100_000


def is_strongly_connected(wins: np.ndarray) -> bool:
    """Whether every item beats and is beaten along directed paths of positive weight."""
    K = wins.shape[0]
    if K <= 1:
        return True
    n, _ = connected_components(np.asarray(wins) > 0, directed=True, connection="strong")
    return n == 1


def btl_weights(c: ComparisonMatrix, weighted: bool) -> np.ndarray:
    """Counts for BTL, or relative frequencies on observed pairs for BTL(R)."""
    if not weighted:
        return np.asarray(c.counts, dtype=float)
    p = to_probability_matrix(c)
    return np.where(p.defined, p.probs, 0.0)


def btl_stationarity_residual(w: np.ndarray, theta: np.ndarray) -> float:
    """max_i |W_i - sum_j n_ij theta_i / (theta_i + theta_j)| relative to the total weight."""
    n = w + w.T
    expected = (n * theta[:, None] / (theta[:, None] + theta[None, :])).sum(axis=1)
    return float(np.max(np.abs(w.sum(axis=1) - expected)) / max(w.sum(), 1.0))


def btl_mle(
    c: ComparisonMatrix, weighted: bool = False, tol: float = BTL_TOL, max_iter: int = BTL_MAX_ITER
) -> np.ndarray:
    """Bradley-Terry maximum likelihood strengths, normalised to sum 1.

    With ``weighted`` the likelihood uses relative win frequencies of observed
    pairs instead of raw counts. The estimate exists only when the win graph is
    strongly connected; otherwise :class:`EstimationError` is raised.
    """
    w = btl_weights(c, weighted)
    K = w.shape[0]
    if K == 1:
        return np.ones(1)
    if not is_strongly_connected(w):
        raise EstimationError("BTL: comparison graph is not strongly connected; the MLE does not exist")
    theta, _, converged = kernels.btl_mm(w, np.full(K, 1.0 / K), tol, max_iter)
    if not converged:
        raise EstimationError(f"BTL: MM iteration did not converge in {max_iter} iterations")
    return np.asarray(theta)


def log_odds_matrix(p: ProbabilityMatrix) -> np.ndarray:
    """X_ij = log(p_ij / p_ji) where p_ji lies strictly inside (0, 1), else 0."""
    probs = np.asarray(p.probs)
    pt = probs.T
    ok = (pt > 0) & (pt < 1) & ~np.eye(p.K, dtype=bool)
    X = np.zeros_like(probs)
    X[ok] = np.log(probs[ok] / pt[ok])
    return X


def hodgerank_ls(p: ProbabilityMatrix) -> np.ndarray:
    """HodgeRank least squares on log-odds; returned scores are larger for preferred items.

    The fitted potentials satisfy theta_j - theta_i ≈ X_ij, so they decrease
    with preference; the returned scores are their negation with zero mean.
    """
    if not p.defined.any():
        raise EstimationError("LS: no observed pairs")
    X = log_odds_matrix(p)
    K = p.K
    ii, jj = np.nonzero(np.triu(X != 0, k=1))
    if ii.size == 0:
        return np.zeros(K)
    A = np.zeros((ii.size, K))
    A[np.arange(ii.size), jj] = 1.0
    A[np.arange(ii.size), ii] = -1.0
    theta, *_ = np.linalg.lstsq(A, X[ii, jj], rcond=None)
    scores = -theta
    return scores - scores.mean()
