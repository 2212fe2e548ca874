"""Plackett-Luce and Mallows distributions over complete rankings.

Batch samplers return 0-based orderings as ``(n, K)`` int64 arrays, row ``r``
listing items best first. Single-draw helpers return :class:`Ranking`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from . import kernels
from .core import DataError, Ranking, kendall_distance

__all__ = [
    "PLParams",
    "MallowsParams",
    "RankingDistribution",
    "pl_probability",
    "pl_sample",
    "pl_pairwise_marginal",
    "pl_marginal",
    "pl_subset_probability",
    "pl_mode",
    "mallows_normalizer",
    "mallows_normalizer_bruteforce",
    "mallows_probability",
    "mallows_sample",
    "enumerate_orderings",
    "ordering_probabilities",
    "sample_orderings",
    "ground_truth",
    "pairwise_marginals",
]


@dataclass(frozen=True)
class PLParams:
    """Plackett-Luce weights, stored unnormalised."""

    theta: tuple

    def __post_init__(self):
        theta = tuple(self.theta)
        if not theta:
            raise DataError("PL model needs at least one item")
        for t in theta:
            if not (t > 0) or not math.isfinite(float(t)):
                raise DataError(f"PL weights must be finite and strictly positive, got {theta}")
        object.__setattr__(self, "theta", theta)

    @property
    def K(self) -> int:
        return len(self.theta)

    def as_array(self) -> np.ndarray:
        return np.asarray([float(t) for t in self.theta])

    def normalized(self) -> np.ndarray:
        a = self.as_array()
        return a / a.sum()

    @property
    def is_integral(self) -> bool:
        return all(float(t).is_integer() for t in self.theta)


@dataclass(frozen=True)
class MallowsParams:
    reference: Ranking
    dispersion: float

    def __post_init__(self):
        if not isinstance(self.reference, Ranking):
            object.__setattr__(self, "reference", Ranking(tuple(self.reference)))
        if not (self.dispersion >= 0) or not math.isfinite(self.dispersion):
            raise DataError(f"Mallows dispersion must be finite and >= 0, got {self.dispersion}")

    @property
    def K(self) -> int:
        return self.reference.K


@dataclass(frozen=True, eq=False)
class RankingDistribution:
    """An explicit distribution on S_K given as ``{Ranking: probability}``.

    Rankings absent from the mapping have probability zero. Probabilities may
    be floats or Fractions; with Fractions the exact oracle stays rational.
    """

    probs: Mapping[Ranking, Union[float, Fraction]]

    def __post_init__(self):
        probs = {}
        K = None
        for r, p in dict(self.probs).items():
            if not isinstance(r, Ranking):
                r = Ranking(tuple(r))
            if K is None:
                K = r.K
            elif r.K != K:
                raise DataError("all rankings in a distribution must have the same size")
            if p < 0:
                raise DataError(f"negative probability {p} for {r}")
            probs[r] = p
        if not probs:
            raise DataError("empty ranking distribution")
        total = sum(probs.values())
        if abs(float(total) - 1.0) > 1e-9:
            raise DataError(f"ranking probabilities sum to {float(total)}, expected 1")
        object.__setattr__(self, "probs", probs)

    @property
    def K(self) -> int:
        return next(iter(self.probs)).K

    def probability(self, pi: Ranking):
        return self.probs.get(pi, 0)

    @property
    def is_rational(self) -> bool:
        return all(isinstance(p, (int, Fraction)) for p in self.probs.values())

    @classmethod
    def from_file(cls, path) -> "RankingDistribution":
        """Lines ``r_1 ... r_K p`` in rank form; '#' comments allowed."""
        probs = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                s = line.split("#", 1)[0].strip()
                if not s:
                    continue
                parts = s.split()
                if len(parts) < 2:
                    raise DataError(f"{path}:{lineno}: expected ranks followed by a probability")
                try:
                    r = Ranking(tuple(int(x) for x in parts[:-1]))
                    p = Fraction(parts[-1])
                except (ValueError, ZeroDivisionError) as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
                probs[r] = probs.get(r, 0) + p
        return cls(probs)


Model = Union[PLParams, MallowsParams, RankingDistribution]


def _check_dims(params, pi: Ranking) -> None:
    if params.K != pi.K:
        raise ValueError(f"model has {params.K} items but ranking has {pi.K}")


def pl_probability(params: PLParams, pi: Ranking, exact: bool = False):
    """Product of stage-wise choice probabilities; a Fraction when ``exact``."""
    _check_dims(params, pi)
    theta = [Fraction(t) for t in params.theta] if exact else [float(t) for t in params.theta]
    order = [theta[i - 1] for i in pi.ordering.items]
    prob = Fraction(1) if exact else 1.0
    remaining = sum(order)
    for w in order[:-1]:
        prob *= w / remaining
        remaining -= w
    return prob


def pl_sample(params: PLParams, rng: np.random.Generator) -> Ranking:
    o = sample_orderings(params, 1, rng)[0]
    return Ranking.from_ordering(o + 1)


def pl_pairwise_marginal(params: PLParams, i: int, j: int, exact: bool = False):
    if i == j:
        raise ValueError("pairwise marginal needs two distinct items")
    ti, tj = params.theta[i - 1], params.theta[j - 1]
    if exact:
        return Fraction(ti) / (Fraction(ti) + Fraction(tj))
    return float(ti) / (float(ti) + float(tj))


def pl_marginal(params: PLParams, items: Sequence[int]) -> PLParams:
    """PL restricted to ``items``; weights keep the order in which items are listed."""
    items = list(items)
    if not items:
        raise ValueError("marginal over an empty subset")
    if len(set(items)) != len(items) or not all(1 <= i <= params.K for i in items):
        raise ValueError(f"invalid item subset {items} for K={params.K}")
    return PLParams(tuple(params.theta[i - 1] for i in items))


def pl_subset_probability(params: PLParams, ordering: Sequence[int], exact: bool = False):
    """Probability that the listed items appear in exactly this relative order."""
    sub = pl_marginal(params, ordering)
    return pl_probability(sub, Ranking.identity(len(ordering)), exact=exact)


def pl_mode(params: PLParams) -> Ranking:
    """Items sorted by decreasing weight; equal weights keep ascending index."""
    order = sorted(range(1, params.K + 1), key=lambda i: (-float(params.theta[i - 1]), i))
    return Ranking.from_ordering(order)


def mallows_normalizer(K: int, phi: float) -> float:
    """Closed form: product over t = 1..K of sum_{d<t} exp(-phi d)."""
    if phi == 0:
        return float(math.factorial(K))
    z = 1.0
    for t in range(2, K + 1):
        z *= math.expm1(-phi * t) / math.expm1(-phi)
    return z


def mallows_normalizer_bruteforce(K: int, phi: float) -> float:
    ref = Ranking.identity(K)
    return math.fsum(
        math.exp(-phi * kendall_distance(Ranking.from_ordering(p), ref))
        for p in itertools.permutations(range(1, K + 1))
    )


def mallows_probability(params: MallowsParams, pi: Ranking) -> float:
    _check_dims(params, pi)
    d = kendall_distance(pi, params.reference)
    return math.exp(-params.dispersion * d) / mallows_normalizer(params.K, params.dispersion)


def _insertion_table(K: int, phi: float) -> np.ndarray:
    """Row t: cumulative probabilities of inserting the (t+1)-th reference item at slots 0..t."""
    cum = np.zeros((K, K))
    for t in range(K):
        w = np.exp(-phi * (t - np.arange(t + 1)))
        c = np.cumsum(w / w.sum())
        c[-1] = 1.0
        cum[t, : t + 1] = c
    return cum


def mallows_sample(params: MallowsParams, rng: np.random.Generator) -> Ranking:
    o = sample_orderings(params, 1, rng)[0]
    return Ranking.from_ordering(o + 1)


def enumerate_orderings(K: int) -> np.ndarray:
    """All K! orderings (0-based) in lexicographic order."""
    if K == 0:
        return np.empty((1, 0), dtype=np.int64)
    return np.array(list(itertools.permutations(range(K))), dtype=np.int64)


def _ranks_from_orderings(orderings: np.ndarray) -> np.ndarray:
    n, K = orderings.shape
    ranks = np.empty_like(orderings)
    ranks[np.arange(n)[:, None], orderings] = np.arange(K)[None, :]
    return ranks


def ordering_probabilities(model: Model, orderings: np.ndarray) -> np.ndarray:
    """Probability of each row of ``orderings`` (0-based) under ``model``."""
    orderings = np.asarray(orderings, dtype=np.int64)
    if isinstance(model, PLParams):
        w = model.as_array()[orderings]
        suffix = np.cumsum(w[:, ::-1], axis=1)[:, ::-1]
        return np.prod(w / suffix, axis=1)
    if isinstance(model, MallowsParams):
        ranks = _ranks_from_orderings(orderings)
        ref = np.asarray(model.reference.ranks) - 1
        K = model.K
        d = np.zeros(orderings.shape[0], dtype=np.int64)
        for i in range(K):
            for j in range(i + 1, K):
                d += (np.sign(ranks[:, i] - ranks[:, j]) != np.sign(ref[i] - ref[j]))
        return np.exp(-model.dispersion * d) / mallows_normalizer(K, model.dispersion)
    if isinstance(model, RankingDistribution):
        return np.array(
            [float(model.probability(Ranking.from_ordering(o + 1))) for o in orderings]
        )
    raise TypeError(f"unsupported model type {type(model).__name__}")


def sample_orderings(model: Model, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. complete orderings (0-based)."""
    K = model.K
    if isinstance(model, PLParams):
        u = rng.random((n, K))
        return kernels.pl_sample_orderings(model.as_array(), u)
    if isinstance(model, MallowsParams):
        u = rng.random((n, K))
        ref = np.asarray(model.reference.ordering.items, dtype=np.int64) - 1
        return kernels.rim_sample_orderings(ref, _insertion_table(K, model.dispersion), u)
    if isinstance(model, RankingDistribution):
        rankings = list(model.probs)
        p = np.array([float(model.probs[r]) for r in rankings])
        idx = rng.choice(len(rankings), size=n, p=p / p.sum())
        table = np.array([np.asarray(r.ordering.items) - 1 for r in rankings], dtype=np.int64)
        return table[idx]
    raise TypeError(f"unsupported model type {type(model).__name__}")


def ground_truth(model: Model) -> Ranking:
    """Target ranking: PL mode, Mallows reference, or the most probable ranking."""
    if isinstance(model, PLParams):
        return pl_mode(model)
    if isinstance(model, MallowsParams):
        return model.reference
    if isinstance(model, RankingDistribution):
        return max(model.probs, key=lambda r: (model.probs[r], tuple(-x for x in r.ordering.items)))
    raise TypeError(f"unsupported model type {type(model).__name__}")


def pairwise_marginals(model: Model, exact: bool = False) -> np.ndarray:
    """Matrix of P(a_i precedes a_j); closed form for PL, enumeration otherwise."""
    K = model.K
    if isinstance(model, PLParams):
        if exact:
            out = np.zeros((K, K), dtype=object)
            out[:] = Fraction(0)
            for i in range(K):
                for j in range(K):
                    if i != j:
                        out[i, j] = pl_pairwise_marginal(model, i + 1, j + 1, exact=True)
            return out
        t = model.as_array()
        p = t[:, None] / (t[:, None] + t[None, :])
        np.fill_diagonal(p, 0.0)
        return p
    if exact:
        if not isinstance(model, RankingDistribution):
            raise TypeError("exact marginals need a PL model or a rational ranking distribution")
        out = np.zeros((K, K), dtype=object)
        out[:] = Fraction(0)
        for r, p in model.probs.items():
            for i in range(K):
                for j in range(K):
                    if i != j and r.ranks[i] < r.ranks[j]:
                        out[i, j] += Fraction(p)
        return out
    orderings = enumerate_orderings(K)
    probs = ordering_probabilities(model, orderings)
    ranks = _ranks_from_orderings(orderings)
    out = np.zeros((K, K))
    for i in range(K):
        for j in range(K):
            if i != j:
                out[i, j] = probs[ranks[:, i] < ranks[:, j]].sum()
    return out
