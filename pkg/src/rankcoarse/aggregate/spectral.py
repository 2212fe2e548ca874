"""Markov-chain rankings: Rank Centrality, MC2, MC3 and the stationary solver.

The transition matrices are built in the printed column convention, where
entry (i, j) is the probability of moving from j to i. When that matrix is
column-stochastic its transpose is used as-is. Otherwise its off-diagonal
entries are kept as relative transition rates and uniformised into a lazy
row-stochastic chain, which has the same stationary distribution as the
continuous-time chain with those rates; the flag ``<method>:uniformized`` is
recorded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..core import ProbabilityMatrix
from .base import EstimationError, _note

STATIONARY_TOL = 1e-10
STATIONARY_MAX_ITER = 1_000_000
TELEPORT = 1e-6


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix; ``q[i, j]`` is the probability of moving from i to j."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {q.shape}")
        if (q < -1e-12).any() or np.max(np.abs(q.sum(axis=1) - 1.0), initial=0.0) > 1e-10:
            raise ValueError("transition matrix must be non-negative with rows summing to 1")
        q = np.clip(q, 0.0, None)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def K(self) -> int:
        return self.q.shape[0]


def _irreducible(q: np.ndarray) -> bool:
    n, _ = connected_components(q > 0, directed=True, connection="strong")
    return n == 1


def _solve_stationary(q: np.ndarray) -> np.ndarray:
    K = q.shape[0]
    A = q.T - np.eye(K)
    A[-1, :] = 1.0
    b = np.zeros(K)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_distribution(
    q: TransitionMatrix | np.ndarray,
    tol: float = STATIONARY_TOL,
    max_iter: int = STATIONARY_MAX_ITER,
    beta: float = TELEPORT,
    diagnostics: set | None = None,
) -> np.ndarray:
    """Power iteration from the uniform vector until the L1 residual is below ``tol``.

    Reducible chains, and chains on which the iteration does not converge,
    are mixed with the uniform chain at weight ``beta``; the flag
    ``teleport`` is then added to ``diagnostics``.
    """
    if not isinstance(q, TransitionMatrix):
        q = TransitionMatrix(q)
    P = q.q
    K = q.K
    if K == 1:
        return np.ones(1)
    if _irreducible(P):
        pi = np.full(K, 1.0 / K)
        for _ in range(max_iter):
            nxt = pi @ P
            nxt /= nxt.sum()
            done = np.abs(nxt - pi).sum() <= tol
            pi = nxt
            if done:
                return pi
    _note(diagnostics, "teleport")
    mixed = (1.0 - beta) * P + beta / K
    return _solve_stationary(mixed)


def _as_chain(M: np.ndarray, name: str, diagnostics: set | None) -> TransitionMatrix:
    cols = M.sum(axis=0)
    if (M >= -1e-12).all() and np.max(np.abs(cols - 1.0)) <= 1e-10:
        return TransitionMatrix(M.T)
    rates = np.clip(M.T, 0.0, None)
    np.fill_diagonal(rates, 0.0)
    out = rates.sum(axis=1)
    d = 2.0 * out.max()
    _note(diagnostics, f"{name}:uniformized")
    if d == 0:
        return TransitionMatrix(np.eye(M.shape[0]))
    P = rates / d
    np.fill_diagonal(P, 1.0 - out / d)
    return TransitionMatrix(P)


def rank_centrality_matrix(p: ProbabilityMatrix) -> np.ndarray:
    """Printed RC matrix: off-diagonal p_ij / K, diagonal 1 - sum_k p_ki / K."""
    P = np.array(p.probs)
    np.fill_diagonal(P, 0.0)
    K = p.K
    M = P / K
    np.fill_diagonal(M, 1.0 - P.sum(axis=0) / K)
    return M


def rank_centrality(p: ProbabilityMatrix, diagnostics: set | None = None) -> np.ndarray:
    chain = _as_chain(rank_centrality_matrix(p), "RC", diagnostics)
    return stationary_distribution(chain, diagnostics=diagnostics)


def mc2_matrix(p: ProbabilityMatrix) -> np.ndarray:
    """Printed MC2 matrix: off-diagonal p_ji / sum_j p_ij, zero diagonal."""
    P = np.array(p.probs)
    np.fill_diagonal(P, 0.0)
    wins = P.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        M = np.where(wins[:, None] > 0, P.T / wins[:, None], 0.0)
    np.fill_diagonal(M, 0.0)
    return M


def _degrees(P: np.ndarray) -> np.ndarray:
    pos = P > 0
    np.fill_diagonal(pos, False)
    return np.maximum(pos.sum(axis=1), pos.sum(axis=0)).astype(float)


def mc3_matrix(p: ProbabilityMatrix) -> np.ndarray:
    """Printed MC3 matrix: off-diagonal p_ij / deg_i, diagonal 1 - sum_k p_ki / deg_i."""
    P = np.array(p.probs)
    np.fill_diagonal(P, 0.0)
    deg = _degrees(P)
    safe = np.where(deg > 0, deg, 1.0)
    M = np.where(deg[:, None] > 0, P / safe[:, None], 0.0)
    np.fill_diagonal(M, np.where(deg > 0, 1.0 - P.sum(axis=0) / safe, 1.0))
    return M


def spectral_mc(p: ProbabilityMatrix, variant: str, diagnostics: set | None = None) -> np.ndarray:
    """Stationary scores of MC2 or MC3, oriented so that preferred items score higher.

    The MC2 chain moves mass towards the items that lose, so its scores are
    the negated stationary probabilities.
    """
    variant = variant.upper()
    if variant == "MC2":
        chain = _as_chain(mc2_matrix(p), "MC2", diagnostics)
        return -stationary_distribution(chain, diagnostics=diagnostics)
    if variant == "MC3":
        chain = _as_chain(mc3_matrix(p), "MC3", diagnostics)
        return stationary_distribution(chain, diagnostics=diagnostics)
    raise ValueError(f"unknown spectral variant {variant!r}; expected MC2 or MC3")


def wu1_matrix(p: ProbabilityMatrix) -> np.ndarray:
    """Printed WU1 matrix: off-diagonal p_ij / (K-1), diagonal sum_s p_is / (K-1)."""
    P = np.array(p.probs)
    np.fill_diagonal(P, 0.0)
    K = p.K
    if K < 2:
        raise EstimationError("WU1 needs at least two items")
    M = P / (K - 1)
    np.fill_diagonal(M, P.sum(axis=1) / (K - 1))
    return M


def wu1(p: ProbabilityMatrix, diagnostics: set | None = None) -> np.ndarray:
    if p.K == 1:
        return np.ones(1)
    chain = _as_chain(wu1_matrix(p), "WU1", diagnostics)
    return stationary_distribution(chain, diagnostics=diagnostics)
