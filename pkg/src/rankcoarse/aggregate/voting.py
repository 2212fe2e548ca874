"""Borda and Copeland scores."""

import numpy as np

from ..core import ProbabilityMatrix


def borda(p: ProbabilityMatrix) -> np.ndarray:
    """s_i = sum over j != i of p_ij."""
    probs = np.array(p.probs)
    np.fill_diagonal(probs, 0.0)
    return probs.sum(axis=1)


def copeland(p: ProbabilityMatrix) -> np.ndarray:
    """s_i = number of j != i with p_ij > 1/2."""
    wins = np.asarray(p.probs) > 0.5
    np.fill_diagonal(wins, False)
    return wins.sum(axis=1).astype(float)
