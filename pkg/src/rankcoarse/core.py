"""Permutations, pairwise preference data and the Kendall metric.

All public interfaces speak 1-indexed items and positions. Numpy arrays used
internally by the batch kernels are 0-indexed.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RankCoarseError",
    "DataError",
    "ConfigError",
    "Ranking",
    "Ordering",
    "PairwisePreference",
    "ComparisonMatrix",
    "ProbabilityMatrix",
    "UndefinedPolicy",
    "ranking_to_ordering",
    "ordering_to_ranking",
    "kendall_distance",
    "normalized_kendall_distance",
    "build_comparison_matrix",
    "to_probability_matrix",
    "read_preferences",
    "write_preferences",
]


class RankCoarseError(Exception):
    """Base class for errors raised by this package."""


class DataError(RankCoarseError, ValueError):
    """Malformed or inconsistent input data."""


class ConfigError(RankCoarseError, ValueError):
    """Invalid experiment or command configuration."""


def _check_permutation(values: Sequence[int], what: str) -> tuple[int, ...]:
    vals = tuple(int(v) for v in values)
    if not vals:
        raise DataError(f"{what} needs at least one item")
    if sorted(vals) != list(range(1, len(vals) + 1)):
        raise DataError(f"{what} must be a permutation of 1..{len(vals)}, got {vals}")
    return vals


@dataclass(frozen=True)
class Ranking:
    """A complete ranking in rank form: ``ranks[k]`` is the position of item k+1."""

    ranks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ranks", _check_permutation(self.ranks, "ranking"))

    def __len__(self) -> int:
        return len(self.ranks)

    def __iter__(self):
        return iter(self.ranks)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.ranks)) + "]"

    @property
    def K(self) -> int:
        return len(self.ranks)

    @property
    def ordering(self) -> "Ordering":
        return ranking_to_ordering(self)

    def position(self, item: int) -> int:
        return self.ranks[item - 1]

    @classmethod
    def from_ordering(cls, items: Sequence[int] | "Ordering") -> "Ranking":
        if not isinstance(items, Ordering):
            items = Ordering(tuple(items))
        return ordering_to_ranking(items)

    @classmethod
    def identity(cls, K: int) -> "Ranking":
        return cls(tuple(range(1, K + 1)))


@dataclass(frozen=True)
class Ordering:
    """A complete ranking in order form: ``items[j]`` is the item on position j+1."""

    items: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", _check_permutation(self.items, "ordering"))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.items)) + ")"

    @property
    def K(self) -> int:
        return len(self.items)

    @property
    def ranking(self) -> Ranking:
        return ordering_to_ranking(self)


def ranking_to_ordering(r: Ranking) -> Ordering:
    items = [0] * len(r.ranks)
    for item, pos in enumerate(r.ranks, start=1):
        items[pos - 1] = item
    return Ordering(tuple(items))


def ordering_to_ranking(o: Ordering) -> Ranking:
    ranks = [0] * len(o.items)
    for pos, item in enumerate(o.items, start=1):
        ranks[item - 1] = pos
    return Ranking(tuple(ranks))


def kendall_distance(a: Ranking, b: Ranking) -> int:
    """Number of item pairs ordered oppositely by ``a`` and ``b``."""
    if a.K != b.K:
        raise ValueError(f"rankings have different sizes: {a.K} != {b.K}")
    ra = np.asarray(a.ranks)
    rb = np.asarray(b.ranks)
    da = np.sign(ra[:, None] - ra[None, :])
    db = np.sign(rb[:, None] - rb[None, :])
    return int(np.count_nonzero(np.triu(da != db, k=1)))


def normalized_kendall_distance(a: Ranking, b: Ranking) -> float:
    """Kendall distance divided by K(K-1)/2; 0 for K < 2."""
    K = a.K
    if K < 2:
        if b.K != K:
            raise ValueError(f"rankings have different sizes: {a.K} != {b.K}")
        return 0.0
    return kendall_distance(a, b) / (K * (K - 1) / 2)


@dataclass(frozen=True)
class PairwisePreference:
    """Observed comparison ``winner`` ≻ ``loser``."""

    winner: int
    loser: int

    def __post_init__(self):
        if self.winner == self.loser:
            raise DataError(f"winner and loser must differ, got {self.winner}")
        if self.winner < 1 or self.loser < 1:
            raise DataError(f"items are 1-indexed, got ({self.winner}, {self.loser})")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ComparisonMatrix:
    """Win counts: ``counts[i-1, j-1]`` is the number of observed a_i ≻ a_j."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise DataError(f"comparison matrix must be square, got shape {c.shape}")
        if c.size and (c < 0).any():
            raise DataError("comparison counts must be non-negative")
        if np.diagonal(c).any():
            raise DataError("comparison matrix diagonal must be zero")
        object.__setattr__(self, "counts", _readonly(c))

    @property
    def K(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self):
        return self.counts.sum()

    def __eq__(self, other) -> bool:
        return isinstance(other, ComparisonMatrix) and np.array_equal(self.counts, other.counts)

    def __getitem__(self, key: tuple[int, int]):
        i, j = key
        return self.counts[i - 1, j - 1]

    def relabel(self, perm: Sequence[int]) -> "ComparisonMatrix":
        """Rename item ``k`` to ``perm[k-1]``."""
        p = np.asarray(perm) - 1
        out = np.zeros_like(self.counts)
        out[np.ix_(p, p)] = self.counts
        return ComparisonMatrix(out)

    def scaled(self, factor) -> "ComparisonMatrix":
        return ComparisonMatrix(self.counts * factor)


class UndefinedPolicy(str, enum.Enum):
    """Value used for p̂ cells of pairs that were never compared."""

    HALF = "half"
    ZERO = "zero"
    SKIP = "skip"

    @classmethod
    def parse(cls, value: "UndefinedPolicy | str") -> "UndefinedPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown undefined-cell policy {value!r}; expected half, zero or skip") from None


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """Relative win frequencies with a per-cell defined flag.

    Undefined off-diagonal cells hold 0.5 under ``half`` and 0 otherwise.
    The diagonal is 0 and never defined.
    """

    probs: np.ndarray
    defined: np.ndarray
    policy: UndefinedPolicy = UndefinedPolicy.HALF

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        d = np.asarray(self.defined, dtype=bool)
        if p.shape != d.shape or p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DataError("probability matrix and mask must be square and of equal shape")
        object.__setattr__(self, "probs", _readonly(p))
        object.__setattr__(self, "defined", _readonly(d))
        object.__setattr__(self, "policy", UndefinedPolicy.parse(self.policy))

    @property
    def K(self) -> int:
        return self.probs.shape[0]

    @property
    def has_undefined(self) -> bool:
        off = ~np.eye(self.K, dtype=bool)
        return bool((~self.defined & off).any())

    def __getitem__(self, key: tuple[int, int]) -> float:
        i, j = key
        return float(self.probs[i - 1, j - 1])

    @classmethod
    def from_table(cls, probs, defined=None, policy=UndefinedPolicy.HALF) -> "ProbabilityMatrix":
        """Wrap a complete table such as exact BTL marginals; off-diagonal cells default to defined."""
        p = np.array(probs, dtype=float)
        K = p.shape[0]
        np.fill_diagonal(p, 0.0)
        if defined is None:
            defined = ~np.eye(K, dtype=bool)
        return cls(p, defined, policy)


def _coerce_preference(p) -> PairwisePreference:
    if isinstance(p, PairwisePreference):
        return p
    w, l = p
    return PairwisePreference(int(w), int(l))


def build_comparison_matrix(data: Iterable[PairwisePreference | tuple[int, int]], K: int) -> ComparisonMatrix:
    counts = np.zeros((K, K), dtype=np.int64)
    for n, pref in enumerate(data):
        pref = _coerce_preference(pref)
        if pref.winner > K or pref.loser > K:
            raise DataError(f"preference #{n + 1} ({pref.winner}, {pref.loser}) exceeds K={K}")
        counts[pref.winner - 1, pref.loser - 1] += 1
    return ComparisonMatrix(counts)


def to_probability_matrix(
    c: ComparisonMatrix, policy: UndefinedPolicy | str = UndefinedPolicy.HALF
) -> ProbabilityMatrix:
    policy = UndefinedPolicy.parse(policy)
    counts = np.asarray(c.counts, dtype=float)
    n = counts + counts.T
    defined = n > 0
    fill = 0.5 if policy is UndefinedPolicy.HALF else 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(defined, counts / np.where(defined, n, 1.0), fill)
    np.fill_diagonal(probs, 0.0)
    np.fill_diagonal(defined, False)
    return ProbabilityMatrix(probs, defined, policy)


def exact_probability_table(c: ComparisonMatrix) -> dict[tuple[int, int], Fraction]:
    """p̂ in rational arithmetic for every observed ordered pair."""
    out = {}
    K = c.K
    for i in range(K):
        for j in range(K):
            n = int(c.counts[i, j]) + int(c.counts[j, i])
            if i != j and n:
                out[(i + 1, j + 1)] = Fraction(int(c.counts[i, j]), n)
    return out


_ITEMS_HEADER = re.compile(r"#\s*items\s*[:=]\s*(\d+)\s*$", re.IGNORECASE)


def read_preference_file(path: str | Path) -> tuple[list[PairwisePreference], int | None]:
    """Read "i j" lines (a_i ≻ a_j) plus the optional ``# items: K`` header.

    Blank lines and other '#' comments are ignored. The second value is the
    declared number of items, or None when the file has no header.
    """
    prefs = []
    K = None
    try:
        fh = open(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                m = _ITEMS_HEADER.match(s)
                if m:
                    K = int(m.group(1))
                continue
            parts = s.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected two item indices, got {s!r}")
            try:
                prefs.append(PairwisePreference(int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if K is not None:
        for p in prefs:
            if max(p.winner, p.loser) > K:
                raise DataError(f"{path}: item {max(p.winner, p.loser)} exceeds the declared {K} items")
    return prefs, K


def read_preferences(path: str | Path) -> list[PairwisePreference]:
    return read_preference_file(path)[0]


def write_preferences(prefs: Iterable[PairwisePreference], path: str | Path, K: int | None = None) -> None:
    """Write one "winner loser" line per preference, after a ``# items: K`` header if K is given."""
    with open(path, "w") as fh:
        if K is not None:
            fh.write(f"# items: {K}\n")
        for p in prefs:
            fh.write(f"{p.winner} {p.loser}\n")
