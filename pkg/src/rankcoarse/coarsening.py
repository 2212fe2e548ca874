"""Rank-dependent coarsening of complete rankings.

A coarsening draws a subset of *positions* without looking at the items on
them and keeps the items found there. The pairwise variants are described by
an upper-triangular matrix ``lam`` with ``lam[a-1, b-1]`` the probability of
keeping positions a < b.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .core import DataError, PairwisePreference, Ranking
from .models import (
    Model,
    PLParams,
    RankingDistribution,
    enumerate_orderings,
    ordering_probabilities,
    pairwise_marginals,
    pl_probability,
    sample_orderings,
)

__all__ = [
    "CoarseningSpec",
    "DegeneratePair",
    "UniformPairs",
    "CustomPairs",
    "TopK",
    "IndependentPositions",
    "IncompleteRanking",
    "ExactQTable",
    "OrderPreservationReport",
    "coarsen",
    "sample_rank_pairs",
    "generate_pairwise_arrays",
    "generate_pairwise_dataset",
    "exact_q",
    "check_order_preservation",
    "swap_dominates",
    "parse_coarsening",
    "MAX_EXACT_K",
]

MAX_EXACT_K = 10


class CoarseningSpec:
    """Base class; subclasses are frozen dataclasses."""

    is_pairwise = True

    def validate(self, K: int) -> None:
        pass

    def pair_probabilities(self, K: int, exact: bool = False) -> np.ndarray:
        raise DataError(f"{self} does not define a distribution over rank pairs")


def _empty_lam(K: int, exact: bool) -> np.ndarray:
    if exact:
        lam = np.empty((K, K), dtype=object)
        lam[:] = Fraction(0)
        return lam
    return np.zeros((K, K))


@dataclass(frozen=True)
class DegeneratePair(CoarseningSpec):
    """Always keep positions ``i`` < ``j``."""

    i: int
    j: int

    def __post_init__(self):
        if not 1 <= self.i < self.j:
            raise DataError(f"degenerate pair needs 1 <= i < j, got ({self.i}, {self.j})")

    def validate(self, K: int) -> None:
        if self.j > K:
            raise DataError(f"rank pair ({self.i}, {self.j}) exceeds K={K}")

    def pair_probabilities(self, K: int, exact: bool = False) -> np.ndarray:
        self.validate(K)
        lam = _empty_lam(K, exact)
        lam[self.i - 1, self.j - 1] = Fraction(1) if exact else 1.0
        return lam

    def __str__(self):
        return f"degenerate {self.i} {self.j}"


@dataclass(frozen=True)
class UniformPairs(CoarseningSpec):
    """Every pair of positions with probability 2/(K^2 - K)."""

    def validate(self, K: int) -> None:
        if K < 2:
            raise DataError("uniform pair coarsening needs K >= 2")

    def pair_probabilities(self, K: int, exact: bool = False) -> np.ndarray:
        self.validate(K)
        lam = _empty_lam(K, exact)
        v = Fraction(2, K * K - K) if exact else 2.0 / (K * K - K)
        for a in range(K):
            for b in range(a + 1, K):
                lam[a, b] = v
        return lam

    def __str__(self):
        return "uniform"


@dataclass(frozen=True, eq=False)
class CustomPairs(CoarseningSpec):
    """Explicit ``{(i, j): probability}`` over position pairs i < j."""

    weights: Mapping[tuple[int, int], float]

    def __post_init__(self):
        w = {}
        for (i, j), v in dict(self.weights).items():
            i, j = int(i), int(j)
            if not 1 <= i < j:
                raise DataError(f"rank pair ({i}, {j}) must satisfy 1 <= i < j")
            if v < 0:
                raise DataError(f"negative probability for rank pair ({i}, {j})")
            w[(i, j)] = w.get((i, j), 0) + v
        if abs(float(sum(w.values())) - 1.0) > 1e-9:
            raise DataError(f"rank pair probabilities sum to {float(sum(w.values()))}, expected 1")
        object.__setattr__(self, "weights", w)

    def __eq__(self, other):
        return isinstance(other, CustomPairs) and self.weights == other.weights

    def __hash__(self):
        return hash(tuple(sorted(self.weights.items())))

    def validate(self, K: int) -> None:
        for i, j in self.weights:
            if j > K:
                raise DataError(f"rank pair ({i}, {j}) exceeds K={K}")

    def pair_probabilities(self, K: int, exact: bool = False) -> np.ndarray:
        self.validate(K)
        lam = _empty_lam(K, exact)
        for (i, j), v in self.weights.items():
            lam[i - 1, j - 1] = Fraction(v) if exact else float(v)
        return lam

    @classmethod
    def from_matrix(cls, lam) -> "CustomPairs":
        lam = np.asarray(lam)
        K = lam.shape[0]
        return cls({(a + 1, b + 1): lam[a, b] for a in range(K) for b in range(a + 1, K) if lam[a, b]})

    @classmethod
    def from_file(cls, path) -> "CustomPairs":
        """Lines ``i j lambda``; '#' comments allowed."""
        w = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                s = line.split("#", 1)[0].strip()
                if not s:
                    continue
                parts = s.split()
                if len(parts) != 3:
                    raise DataError(f"{path}:{lineno}: expected 'i j lambda', got {s!r}")
                try:
                    key = (int(parts[0]), int(parts[1]))
                    w[key] = w.get(key, 0) + Fraction(parts[2])
                except (ValueError, ZeroDivisionError) as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
        return cls(w)

    def __str__(self):
        return "custom " + " ".join(f"{i},{j}:{float(v):g}" for (i, j), v in sorted(self.weights.items()))


@dataclass(frozen=True)
class TopK(CoarseningSpec):
    """Keep positions 1..k. Only k = 2 yields pairwise data."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DataError(f"top-k needs k >= 1, got {self.k}")

    @property
    def is_pairwise(self) -> bool:
        return self.k == 2

    def validate(self, K: int) -> None:
        if self.k > K:
            raise DataError(f"top-{self.k} exceeds K={K}")

    def pair_probabilities(self, K: int, exact: bool = False) -> np.ndarray:
        if self.k != 2:
            return super().pair_probabilities(K, exact)
        return DegeneratePair(1, 2).pair_probabilities(K, exact)

    def __str__(self):
        return f"topk {self.k}"


@dataclass(frozen=True)
class IndependentPositions(CoarseningSpec):
    """Position a kept independently with probability ``weights[a-1]``.

    Used for pairwise data, the subset law is conditioned on exactly two
    positions being kept.
    """

    weights: tuple

    def __post_init__(self):
        w = tuple(self.weights)
        if len(w) < 2:
            raise DataError("independent-position coarsening needs at least two weights")
        if not all(0 < x < 1 for x in w):
            raise DataError(f"position weights must lie in (0, 1), got {w}")
        if not all(a > b for a, b in zip(w, w[1:])):
            raise DataError(f"position weights must be strictly decreasing, got {w}")
        object.__setattr__(self, "weights", w)

    def validate(self, K: int) -> None:
        if len(self.weights) != K:
            raise DataError(f"{len(self.weights)} position weights for K={K}")

    def subset_probability(self, subset: Sequence[int]) -> float:
        s = set(subset)
        return math.prod(w if a in s else 1 - w for a, w in enumerate(self.weights, start=1))

    def pair_probabilities(self, K: int, exact: bool = False) -> np.ndarray:
        self.validate(K)
        lam = _empty_lam(K, exact)
        w = [Fraction(x) for x in self.weights] if exact else [float(x) for x in self.weights]
        odds = [x / (1 - x) for x in w]
        total = sum(odds[a] * odds[b] for a in range(K) for b in range(a + 1, K))
        for a in range(K):
            for b in range(a + 1, K):
                lam[a, b] = odds[a] * odds[b] / total
        return lam

    def __str__(self):
        return "independent " + " ".join(f"{x:g}" for x in self.weights)


@dataclass(frozen=True)
class IncompleteRanking:
    """Items kept by a coarsening, best first, out of ``K`` items."""

    items: tuple[int, ...]
    K: int

    @property
    def ranks(self) -> tuple[int, ...]:
        """Rank form with 0 for missing items."""
        r = [0] * self.K
        for pos, item in enumerate(self.items, start=1):
            r[item - 1] = pos
        return tuple(r)

    def __len__(self):
        return len(self.items)


def coarsen(pi: Ranking, spec: CoarseningSpec, rng: np.random.Generator):
    """Coarsen a single ranking; pairwise specs give a :class:`PairwisePreference`."""
    K = pi.K
    spec.validate(K)
    order = pi.ordering.items
    if isinstance(spec, TopK) and spec.k != 2:
        return IncompleteRanking(tuple(order[: spec.k]), K)
    if isinstance(spec, IndependentPositions):
        keep = rng.random(K) < np.asarray(spec.weights)
        return IncompleteRanking(tuple(o for o, k in zip(order, keep) if k), K)
    a, b = sample_rank_pairs(spec, K, 1, rng)
    return PairwisePreference(order[a[0]], order[b[0]])


def sample_rank_pairs(spec: CoarseningSpec, K: int, n: int, rng: np.random.Generator):
    """Draw ``n`` position pairs (0-based, a < b) independently of any items."""
    lam = spec.pair_probabilities(K)
    a_idx, b_idx = np.triu_indices(K, k=1)
    p = lam[a_idx, b_idx]
    nz = np.flatnonzero(p > 0)
    if nz.size == 1:
        pick = np.full(n, nz[0])
    else:
        pick = nz[rng.choice(nz.size, size=n, p=p[nz] / p[nz].sum())]
    return a_idx[pick].astype(np.int64), b_idx[pick].astype(np.int64)


def generate_pairwise_arrays(model: Model, spec: CoarseningSpec, N: int, rng: np.random.Generator):
    """Winner and loser arrays (0-based items) of ``N`` coarsened observations."""
    if not spec.is_pairwise:
        raise DataError(f"{spec} does not produce pairwise preferences")
    K = model.K
    spec.validate(K)
    orderings = sample_orderings(model, N, rng)
    a, b = sample_rank_pairs(spec, K, N, rng)
    rows = np.arange(N)
    return orderings[rows, a], orderings[rows, b]


def generate_pairwise_dataset(
    model: Model, spec: CoarseningSpec, N: int, rng: np.random.Generator
) -> list[PairwisePreference]:
    """``N`` i.i.d. draws: a complete ranking from ``model``, then one coarsened pair."""
    w, l = generate_pairwise_arrays(model, spec, N, rng)
    return [PairwisePreference(int(x) + 1, int(y) + 1) for x, y in zip(w, l)]


@dataclass(frozen=True, eq=False)
class ExactQTable:
    """``q[i-1, j-1]`` = P(observe a_i ≻ a_j); ``qprime`` = q / (q + q^T).

    Exact tables hold Fractions and ``None`` for undefined q′ cells; float
    tables hold NaN there.
    """

    q: np.ndarray
    qprime: np.ndarray
    defined: np.ndarray
    exact: bool

    @property
    def K(self) -> int:
        return self.q.shape[0]

    def unbiased_against(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        """Whether q′ equals the marginal table ``p`` on every defined cell."""
        if self.exact:
            return all(
                self.qprime[i, j] == p[i, j]
                for i in range(self.K)
                for j in range(self.K)
                if self.defined[i, j]
            )
        p = np.asarray(p, dtype=float)
        return bool(np.all(np.abs(self.qprime[self.defined] - p[self.defined]) <= tol))


def _qprime(q: np.ndarray, exact: bool):
    K = q.shape[0]
    defined = np.zeros((K, K), dtype=bool)
    if exact:
        qp = np.empty((K, K), dtype=object)
        qp[:] = None
        for i in range(K):
            for j in range(K):
                s = q[i, j] + q[j, i]
                if i != j and s != 0:
                    qp[i, j] = q[i, j] / s
                    defined[i, j] = True
        return qp, defined
    s = q + q.T
    defined = (s > 0) & ~np.eye(K, dtype=bool)
    qp = np.full((K, K), np.nan)
    qp[defined] = q[defined] / s[defined]
    return qp, defined


def _exact_support(model: Model, K: int):
    if isinstance(model, RankingDistribution):
        if not model.is_rational:
            raise TypeError("exact oracle needs rational ranking probabilities")
        return [(r.ordering.items, Fraction(p)) for r, p in model.probs.items()]
    if isinstance(model, PLParams):

        out = []
        for perm in itertools.permutations(range(1, K + 1)):
            r = Ranking.from_ordering(perm)
            out.append((perm, pl_probability(model, r, exact=True)))
        return out
    raise TypeError(f"exact oracle is not available for {type(model).__name__}")


def exact_q(model: Model, spec: CoarseningSpec, exact: bool = False) -> ExactQTable:
    """Observation probabilities by enumerating every ranking in S_K."""
    K = model.K
    if K > MAX_EXACT_K:
        raise DataError(f"exact oracle enumerates K! rankings; K={K} exceeds {MAX_EXACT_K}")
    if not spec.is_pairwise:
        raise DataError(f"{spec} does not produce pairwise preferences")
    lam = spec.pair_probabilities(K, exact=exact)
    if exact:
        q = np.empty((K, K), dtype=object)
        q[:] = Fraction(0)
        for order, p in _exact_support(model, K):
            if p == 0:
                continue
            for a in range(K):
                for b in range(a + 1, K):
                    if lam[a, b]:
                        q[order[a] - 1, order[b] - 1] += p * lam[a, b]
    else:
        orderings = enumerate_orderings(K)
        probs = ordering_probabilities(model, orderings)
        q = kernels.q_accumulate(orderings, probs, lam)
    qp, defined = _qprime(q, exact)
    return ExactQTable(q, qp, defined, exact)


@dataclass(frozen=True)
class PairCheck:
    i: int
    j: int
    p: float
    qprime: float | None
    agree: bool


@dataclass(frozen=True)
class OrderPreservationReport:
    """Sign agreement between p_ij - 1/2 and q′_ij - 1/2 over pairs i < j."""

    pairs: tuple[PairCheck, ...]

    @property
    def violations(self) -> list[PairCheck]:
        return [c for c in self.pairs if not c.agree]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return f"order preserved on all {len(self.pairs)} pairs"
        bad = ", ".join(
            f"({c.i},{c.j}): p={float(c.p):.6g} q'={'undefined' if c.qprime is None else f'{float(c.qprime):.6g}'}"
            for c in self.violations
        )
        return f"order violated on {len(self.violations)} of {len(self.pairs)} pairs: {bad}"


def _sign(x) -> int:
    return int(x > 0) - int(x < 0)


def _order_checks(p, table: ExactQTable):
    half = Fraction(1, 2) if table.exact else 0.5
    K = table.K
    checks = []
    for i in range(K):
        for j in range(i + 1, K):
            qp = table.qprime[i, j] if table.defined[i, j] else None
            agree = qp is not None and _sign(p[i, j] - half) == _sign(qp - half)
            checks.append((i, j, p[i, j], qp, agree))
    return checks


def check_order_preservation(model: Model, spec: CoarseningSpec, exact: bool | None = None) -> OrderPreservationReport:
    """Compare binary preferences of the marginals p with those of q′.

    With ``exact=None`` the float oracle is used and any pair whose margin to
    1/2 is below 1e-9 is re-evaluated in rational arithmetic when possible.
    """
    use_exact = bool(exact)
    table = exact_q(model, spec, exact=use_exact)
    p = pairwise_marginals(model, exact=use_exact)
    checks = _order_checks(p, table)
    if exact is None:
        close = any(
            abs(float(c[2]) - 0.5) < 1e-9 or (c[3] is not None and abs(float(c[3]) - 0.5) < 1e-9)
            for c in checks
        )
        rational = isinstance(model, PLParams) or (
            isinstance(model, RankingDistribution) and model.is_rational
        )
        if close and rational:
            table = exact_q(model, spec, exact=True)
            checks = _order_checks(pairwise_marginals(model, exact=True), table)
    return OrderPreservationReport(
        tuple(PairCheck(i + 1, j + 1, pv, qp, agree) for i, j, pv, qp, agree in checks)
    )


def swap_dominates(model: RankingDistribution, i: int, j: int) -> bool:
    """True if p(π) >= p(π with a_i, a_j swapped) for every π placing a_i before a_j."""

    K = model.K
    for perm in itertools.permutations(range(1, K + 1)):
        r = Ranking.from_ordering(perm)
        if r.ranks[i - 1] < r.ranks[j - 1]:
            ranks = list(r.ranks)
            ranks[i - 1], ranks[j - 1] = ranks[j - 1], ranks[i - 1]
            if model.probability(r) < model.probability(Ranking(tuple(ranks))):
                return False
    return True


def parse_coarsening(text: str, base_dir=None) -> CoarseningSpec:
    """Parse "degenerate i j", "uniform", "topk k", "independent w1 .. wK" or "custom FILE"."""
    parts = text.split()
    if not parts:
        raise DataError("empty coarsening specification")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind in ("degenerate", "pair") and len(args) == 2:
            return DegeneratePair(int(args[0]), int(args[1]))
        if kind in ("uniform", "random") and not args:
            return UniformPairs()
        if kind == "topk" and len(args) == 1:
            return TopK(int(args[0]))
        if kind == "independent" and args:
            return IndependentPositions(tuple(float(a) for a in args))
        if kind == "custom" and len(args) == 1:
            path = Path(args[0])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return CustomPairs.from_file(path)
    except ValueError as exc:
        raise DataError(f"bad coarsening specification {text!r}: {exc}") from None
    raise DataError(f"bad coarsening specification {text!r}")
