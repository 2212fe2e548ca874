"""Method catalogue and the common entry point ``aggregate``."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..core import ComparisonMatrix, Ranking, UndefinedPolicy, to_probability_matrix
from .base import argsort_desc, snap_scores
from .coupling import ht_coupling, price, wu2
from .graph import fas_solve
from .spectral import rank_centrality, spectral_mc, wu1
from .statistical import btl_mle, hodgerank_ls
from .voting import borda, copeland


class MethodId(str, enum.Enum):
    BTL = "BTL"
    BTL_R = "BTL_R"
    LS = "LS"
    BORDA = "Borda"
    COPELAND = "Copeland"
    RC = "RC"
    MC2 = "MC2"
    MC3 = "MC3"
    FAS = "FAS"
    FAS_R = "FAS_R"
    FAS_B = "FAS_B"
    HT = "HT"
    PRICE = "Price"
    WU1 = "WU1"
    WU2 = "WU2"

    @classmethod
    def parse(cls, name: "MethodId | str") -> "MethodId":
        """Case-insensitive; accepts the published spellings such as ``BTL(R)``, ``FAS-B`` or ``CP``."""
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper().replace("(", "_").replace(")", "").replace("-", "_")
        key = _ALIASES.get(key, key)
        for m in cls:
            if m.value.upper() == key:
                return m
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(m.value for m in cls)}")

    def __str__(self) -> str:
        return self.value


_ALIASES = {"CP": "COPELAND", "HODGERANK": "LS", "RANKCENTRALITY": "RC"}

ALL_METHODS = tuple(MethodId)


@dataclass(frozen=True)
class AggregationResult:
    ranking: Ranking
    scores: np.ndarray | None
    flags: frozenset = field(default_factory=frozenset)


def parse_methods(text) -> list[MethodId]:
    """Whitespace or comma separated names; ``all`` expands to the full catalogue."""
    if isinstance(text, str):
        names = text.replace(",", " ").split()
    else:
        names = list(text)
    if len(names) == 1 and str(names[0]).lower() == "all":
        return list(ALL_METHODS)
    return [MethodId.parse(n) for n in names]


def _scores(method: MethodId, c: ComparisonMatrix, policy, diag: set):
    p = to_probability_matrix(c, policy)
    if p.has_undefined:
        diag.add("undefined_cells")
    if method is MethodId.BTL:
        return btl_mle(c)
    if method is MethodId.BTL_R:
        return btl_mle(c, weighted=True)
    if method is MethodId.LS:
        return hodgerank_ls(p)
    if method is MethodId.BORDA:
        return borda(p)
    if method is MethodId.COPELAND:
        return copeland(p)
    if method is MethodId.RC:
        return rank_centrality(p, diagnostics=diag)
    if method is MethodId.MC2:
        return spectral_mc(p, "MC2", diagnostics=diag)
    if method is MethodId.MC3:
        return spectral_mc(p, "MC3", diagnostics=diag)
    if method is MethodId.FAS:
        return fas_solve(c.counts, "counts")
    if method is MethodId.FAS_R:
        return fas_solve(p.probs, "relative")
    if method is MethodId.FAS_B:
        return fas_solve(p.probs, "binary")
    if method is MethodId.HT:
        return ht_coupling(c)
    if method is MethodId.PRICE:
        return price(p)
    if method is MethodId.WU1:
        return wu1(p, diagnostics=diag)
    if method is MethodId.WU2:
        return wu2(p)
    raise ValueError(f"unhandled method {method}")


def aggregate_detailed(
    method: MethodId | str, c: ComparisonMatrix, policy: UndefinedPolicy | str = UndefinedPolicy.HALF
) -> AggregationResult:
    method = MethodId.parse(method)
    diag: set = set()
    out = _scores(method, c, policy, diag)
    if isinstance(out, Ranking):
        return AggregationResult(out, None, frozenset(diag))
    scores = np.asarray(out, dtype=float)
    return AggregationResult(argsort_desc(snap_scores(scores)), scores, frozenset(diag))


def aggregate(
    method: MethodId | str, c: ComparisonMatrix, policy: UndefinedPolicy | str = UndefinedPolicy.HALF
) -> Ranking:
    """Predicted ranking of ``method`` on the comparison matrix ``c``."""
    return aggregate_detailed(method, c, policy).ranking
