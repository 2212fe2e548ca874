"""Shared pieces of the aggregation methods."""

from __future__ import annotations

import numpy as np

from ..core import RankCoarseError, Ranking


class EstimationError(RankCoarseError, ValueError):
    """A method cannot produce an estimate from the given data."""


def argsort_desc(scores) -> Ranking:
    """Rank items by decreasing score; equal scores keep ascending item index."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1:
        raise ValueError("scores must be a vector")
    if not np.all(np.isfinite(s)):
        raise ValueError(f"scores must be finite, got {s}")
    order = np.lexsort((np.arange(s.size), -s))
    return Ranking.from_ordering(order + 1)


def snap_scores(scores, rtol: float = 1e-9) -> np.ndarray:
    """Round away solver noise so numerically tied scores tie exactly."""
    s = np.asarray(scores, dtype=float)
    scale = np.max(np.abs(s)) if s.size else 0.0
    if scale == 0:
        return s.copy()
    return np.round(s / (scale * rtol)) * rtol


def _note(diagnostics, flag: str) -> None:
    if diagnostics is not None:
        diagnostics.add(flag)
