"""Property suites behind ``rankcoarse check``.

Each check returns a :class:`CheckResult`; a suite passes when every check
does. The random instance generators are exported so tests can reuse them.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .aggregate import MethodId
from .bench import ExperimentConfig, run_consistency_check, run_sign_pattern_check
from .coarsening import (
    CoarseningSpec,
    CustomPairs,
    DegeneratePair,
    UniformPairs,
    check_order_preservation,
    exact_q,
    swap_dominates,
)
from .core import Ranking
from .models import PLParams, RankingDistribution, pairwise_marginals

__all__ = [
    "CheckResult",
    "random_pl",
    "random_pair_spec",
    "random_swap_dominant",
    "check_exact_table",
    "check_uniform_neutrality",
    "check_order_preservation_random",
    "check_counterexample",
    "check_swap_dominance",
    "check_sign_pattern",
    "check_consistency",
    "run_checks",
    "REFERENCE_THETA",
    "REFERENCE_Q",
    "REFERENCE_QPRIME",
]

REFERENCE_THETA = (14, 5, 1)
# q for the top-two coarsening of PL(14, 5, 1), in units of 1/1140
REFERENCE_Q = {(1, 2): 665, (1, 3): 133, (2, 3): 19, (2, 1): 266, (3, 1): 42, (3, 2): 15}
REFERENCE_QPRIME = {(1, 2): Fraction(665, 931), (1, 3): Fraction(133, 175), (2, 3): Fraction(19, 34)}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def random_pl(rng: np.random.Generator, K: int) -> PLParams:
    """Log-uniform weights spanning two orders of magnitude."""
    return PLParams(tuple(float(x) for x in np.exp(rng.uniform(-np.log(10), np.log(10), K))))


def random_pair_spec(rng: np.random.Generator, K: int, sparse: float = 0.3) -> CustomPairs:
    """Random lambda over position pairs a < b; each cell is zeroed with probability ``sparse``."""
    iu = np.triu_indices(K, 1)
    w = rng.uniform(0.0, 1.0, len(iu[0]))
    w[rng.random(len(w)) < sparse] = 0.0
    if not w.any():
        w[rng.integers(len(w))] = 1.0
    lam = np.zeros((K, K))
    lam[iu] = w / w.sum()
    return CustomPairs.from_matrix(lam)


def random_swap_dominant(rng: np.random.Generator, K: int, i: int, j: int) -> RankingDistribution:
    """A rational distribution with p(π) > p(π with a_i, a_j swapped) whenever π puts a_i first."""
    weights = {}
    for perm in itertools.permutations(range(1, K + 1)):
        r = Ranking.from_ordering(perm)
        if r.ranks[i - 1] > r.ranks[j - 1]:
            continue
        ranks = list(r.ranks)
        ranks[i - 1], ranks[j - 1] = ranks[j - 1], ranks[i - 1]
        low = int(rng.integers(0, 50))
        weights[r] = low + int(rng.integers(1, 50))
        weights[Ranking(tuple(ranks))] = low
    total = sum(weights.values())
    return RankingDistribution({r: Fraction(w, total) for r, w in weights.items()})


def check_exact_table() -> CheckResult:
    def run():
        t = exact_q(PLParams(REFERENCE_THETA), DegeneratePair(1, 2), exact=True)
        bad = [
            (i, j) for (i, j), num in REFERENCE_Q.items() if t.q[i - 1, j - 1] != Fraction(num, 1140)
        ] + [(i, j) for (i, j), v in REFERENCE_QPRIME.items() if t.qprime[i - 1, j - 1] != v]
        f = exact_q(PLParams(tuple(float(x) for x in REFERENCE_THETA)), DegeneratePair(1, 2))
        err = max(
            [abs(f.q[i - 1, j - 1] - num / 1140) for (i, j), num in REFERENCE_Q.items()]
            + [abs(f.qprime[i - 1, j - 1] - float(v)) for (i, j), v in REFERENCE_QPRIME.items()]
        )
        ok = not bad and err <= 1e-12
        return ok, f"theta={REFERENCE_THETA} top-two table, mismatches {bad or 'none'}, float error {err:.1e}"

    return _timed("exact q table", run)


def check_uniform_neutrality(n: int, rng: np.random.Generator, Ks=(3, 4, 5), tol: float = 1e-12) -> CheckResult:
    def run():
        worst = 0.0
        for _ in range(n):
            model = random_pl(rng, int(rng.choice(Ks)))
            t = exact_q(model, UniformPairs())
            p = pairwise_marginals(model)
            worst = max(worst, float(np.max(np.abs(t.qprime[t.defined] - p[t.defined]))))
        return worst <= tol, f"{n} random PL models, max |q' - p| = {worst:.1e}"

    return _timed("uniform coarsening is unbiased", run)


def check_order_preservation_random(n: int, rng: np.random.Generator, Ks=(3, 4, 5, 6)) -> CheckResult:
    def run():
        failures = 0
        for _ in range(n):
            K = int(rng.choice(Ks))
            if not check_order_preservation(random_pl(rng, K), random_pair_spec(rng, K)).ok:
                failures += 1
        return failures == 0, f"{n} random (theta, lambda) instances, {failures} with sign disagreements"

    return _timed("PL order preservation", run)


def check_counterexample(model, spec: CoarseningSpec, expect_violation: bool = True) -> CheckResult:
    def run():
        report = check_order_preservation(model, spec)
        if expect_violation:
            return not report.ok, ("violation detected: " if not report.ok else "no violation: ") + report.summary()
        return report.ok, report.summary()

    return _timed("counterexample" if expect_violation else "order preservation", run)


def check_swap_dominance(n: int, rng: np.random.Generator, Ks=(3, 4)) -> CheckResult:
    def run():
        failures = 0
        for _ in range(n):
            K = int(rng.choice(Ks))
            i, j = (int(x) for x in rng.choice(np.arange(1, K + 1), 2, replace=False))
            dist = random_swap_dominant(rng, K, i, j)
            assert swap_dominates(dist, i, j)
            t = exact_q(dist, random_pair_spec(rng, K), exact=True)
            if not t.q[i - 1, j - 1] > t.q[j - 1, i - 1]:
                failures += 1
        return failures == 0, f"{n} swap-dominant distributions, {failures} with q_ij <= q_ji"

    return _timed("swap dominance", run)


def check_sign_pattern(replications: int = 100, epsilon: float = 0.05, sizes=(1000, 10000, 100000), seed: int = 0):
    def run():
        res = run_sign_pattern_check(REFERENCE_THETA, DegeneratePair(1, 2), epsilon, sizes, replications, seed)
        fr = " ".join(f"N={n}:{f:.2f}" for n, f in zip(res.sizes, res.fractions))
        return res.first_size is not None, f"correct sign pattern {fr}, reaches 1-{epsilon} at N={res.first_size}"

    return _timed("empirical sign pattern", run)


CONSISTENT_METHODS = (MethodId.COPELAND, MethodId.FAS, MethodId.FAS_R, MethodId.FAS_B)


def check_consistency(replications: int = 100, sizes=(1000, 10000, 100000), seed: int = 0, jobs: int = 1):
    def run():
        cfg = ExperimentConfig(PLParams(REFERENCE_THETA), DegeneratePair(1, 2), CONSISTENT_METHODS, sizes, replications, seed)
        out = run_consistency_check(cfg, jobs=jobs)
        bad = [str(m) for m, o in out.items() if not o.passed]
        rates = "; ".join(f"{m} " + " ".join(f"{r:.2f}" for r in o.rates) for m, o in out.items())
        return not bad, f"recovery over N={list(sizes)}: {rates}" + (f"; failing {bad}" if bad else "")

    return _timed("consistency harness", run)


def run_checks(quick: bool = False, seed: int = 0, jobs: int = 1) -> list[CheckResult]:
    """The default suite; ``quick`` runs smaller instance counts."""
    rng = np.random.default_rng(seed)
    counterexample = RankingDistribution({
        Ranking((1, 2, 3)): Fraction(8, 10),
        Ranking((3, 1, 2)): Fraction(1, 10),
        Ranking((3, 2, 1)): Fraction(1, 10),
    })
    scale = 10 if quick else 1
    return [
        check_exact_table(),
        check_uniform_neutrality(100 // scale, rng),
        check_order_preservation_random(1000 // scale, rng),
        check_counterexample(counterexample, DegeneratePair(2, 3), expect_violation=True),
        check_swap_dominance(100 // scale, rng),
        check_sign_pattern(100 // (2 if quick else 1), seed=seed, sizes=(1000, 10000, 50000 if quick else 100000)),
        check_consistency(100 // (2 if quick else 1), sizes=(1000, 10000, 50000 if quick else 100000), seed=seed, jobs=jobs),
    ]
