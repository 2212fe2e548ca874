"""Monte Carlo experiments on synthetic and real ranking data.

Replication ``r`` of a run with master seed ``s`` draws all of its randomness
from ``numpy.random.default_rng(SeedSequence(s, spawn_key=(r,)))``. Results
therefore do not depend on the number of replications requested, on their
execution order, or on the number of worker processes.

Within a replication the sample sizes are nested: the data for a smaller N
is a prefix of the data for the largest N.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .aggregate import ALL_METHODS, MethodId, aggregate_detailed, parse_methods
from .coarsening import (
    CoarseningSpec,
    DegeneratePair,
    generate_pairwise_arrays,
    parse_coarsening,
    sample_rank_pairs,
)
from .core import (
    ComparisonMatrix,
    ConfigError,
    DataError,
    RankCoarseError,
    Ranking,
    UndefinedPolicy,
    kendall_distance,
    normalized_kendall_distance,
)
from .models import MallowsParams, Model, PLParams, ground_truth, sample_orderings

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "ConsistencyOutcome",
    "SignPatternResult",
    "RankingDataset",
    "RealExperimentResult",
    "replication_rng",
    "run_synthetic",
    "run_averaged",
    "run_consistency_check",
    "run_sign_pattern_check",
    "load_dataset",
    "synthetic_stand_in",
    "run_real_experiment",
    "export_results",
    "export_real_results",
    "geometric_theta",
    "RESULT_HEADER",
    "summary_lines",
    "RealExperimentConfig",
    "LoadedConfig",
    "parse_config_text",
    "build_config",
    "load_config",
    "config_values",
    "model_from_values",
    "coarsening_from_values",
    "resolve_config_path",
    "run_config",
    "export_any",
]

RESULT_HEADER = "method,N,mean_kendall,sd_kendall,recovery_rate,flags"
REAL_HEADER = "method,coarsening,median_normalized_kendall,mean_normalized_kendall,failures,flags"


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replication,)))


def geometric_theta(K: int) -> tuple[int, ...]:
    """Default weights 2^(K-i) for i = 1..K."""
    return tuple(2 ** (K - i) for i in range(1, K + 1))


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    coarsening: CoarseningSpec | None
    methods: tuple[MethodId, ...] = ALL_METHODS
    sizes: tuple[int, ...] = (100, 1000, 10000)
    replications: int = 500
    seed: int = 0
    baseline: bool = False
    policy: UndefinedPolicy = UndefinedPolicy.HALF

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(MethodId.parse(m) for m in self.methods))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "policy", UndefinedPolicy.parse(self.policy))
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise ConfigError(f"sample sizes must be positive, got {self.sizes}")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ConfigError(f"sample sizes must be strictly increasing, got {self.sizes}")
        if self.model.K < 2:
            raise ConfigError("experiments need at least two items")
        if not self.baseline:
            if self.coarsening is None or not self.coarsening.is_pairwise:
                raise ConfigError(f"synthetic runs need a pairwise coarsening, got {self.coarsening}")
            try:
                self.coarsening.validate(self.model.K)
            except DataError as exc:
                raise ConfigError(str(exc)) from None

    @property
    def K(self) -> int:
        return self.model.K

    def describe(self) -> dict:
        m = self.model
        if isinstance(m, PLParams):
            model = {"type": "pl", "theta": [float(t) for t in m.theta]}
        elif isinstance(m, MallowsParams):
            model = {"type": "mallows", "reference": list(m.reference.ranks), "phi": m.dispersion}
        else:
            model = {"type": type(m).__name__}
        return {
            "model": model,
            "coarsening": "baseline (all pairs)" if self.baseline else str(self.coarsening),
            "methods": [str(x) for x in self.methods],
            "sizes": list(self.sizes),
            "replications": self.replications,
            "seed": self.seed,
            "policy": self.policy.value,
            "ground_truth": list(ground_truth(m).ranks),
        }


def _counts(w: np.ndarray, l: np.ndarray, K: int) -> np.ndarray:
    return np.bincount(w * K + l, minlength=K * K).reshape(K, K)


def _evaluate(method: MethodId, counts: np.ndarray, truth: Ranking, policy):
    try:
        res = aggregate_detailed(method, ComparisonMatrix(counts), policy)
    except (RankCoarseError, ValueError, np.linalg.LinAlgError) as exc:
        return None, frozenset({"failed"}), str(exc)
    return res.ranking, res.flags, None


def _replication(args):
    cfg, r = args
    rng = replication_rng(cfg.seed, r)
    K = cfg.K
    truth = ground_truth(cfg.model)
    n_max = cfg.sizes[-1]
    if cfg.baseline:
        orderings = sample_orderings(cfg.model, n_max, rng)
    else:
        winners, losers = generate_pairwise_arrays(cfg.model, cfg.coarsening, n_max, rng)
    out = {}
    counts = np.zeros((K, K), dtype=np.int64)
    start = 0
    for N in cfg.sizes:
        if cfg.baseline:
            counts = counts + kernels.all_pair_counts(orderings[start:N], K)
        else:
            counts = counts + _counts(winners[start:N], losers[start:N], K)
        start = N
        for m in cfg.methods:
            ranking, flags, _ = _evaluate(m, counts, truth, cfg.policy)
            d = np.nan if ranking is None else kendall_distance(ranking, truth)
            out[(m, N)] = (d, flags)
    return out


@dataclass
class ExperimentResult:
    """Kendall distances to the ground truth per (method, N) and replication; NaN marks a failure."""

    methods: tuple[MethodId, ...]
    sizes: tuple[int, ...]
    K: int
    distances: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def max_distance(self) -> int:
        return self.K * (self.K - 1) // 2

    def values(self, method, N) -> np.ndarray:
        return self.distances[(MethodId.parse(method), N)]

    def ok_values(self, method, N) -> np.ndarray:
        v = self.values(method, N)
        return v[~np.isnan(v)]

    def mean(self, method, N) -> float:
        v = self.ok_values(method, N)
        return float(v.mean()) if v.size else math.nan

    def sd(self, method, N) -> float:
        v = self.ok_values(method, N)
        if v.size == 0:
            return math.nan
        return float(v.std(ddof=1)) if v.size > 1 else 0.0

    def se(self, method, N) -> float:
        v = self.ok_values(method, N)
        return self.sd(method, N) / math.sqrt(v.size) if v.size else math.nan

    def recovery_rate(self, method, N) -> float:
        """Fraction of all replications with distance exactly 0; failures count as misses."""
        v = self.values(method, N)
        return float(np.count_nonzero(v == 0) / v.size)

    def failures(self, method, N) -> int:
        return int(np.isnan(self.values(method, N)).sum())

    def cell_flags(self, method, N) -> frozenset:
        return self.flags.get((MethodId.parse(method), N), frozenset())


def _collect(cfg: ExperimentConfig, reps: list[dict]) -> ExperimentResult:
    res = ExperimentResult(cfg.methods, cfg.sizes, cfg.K, meta=cfg.describe())
    for m in cfg.methods:
        for N in cfg.sizes:
            res.distances[(m, N)] = np.array([rep[(m, N)][0] for rep in reps], dtype=float)
            res.flags[(m, N)] = frozenset().union(*(rep[(m, N)][1] for rep in reps))
    return res


def _map(fn, items, jobs: int):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(x) for x in items]


def run_synthetic(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Sample, coarsen, aggregate and score every replication of ``cfg``."""
    reps = _map(_replication, [(cfg, r) for r in range(cfg.replications)], jobs)
    return _collect(cfg, reps)


def run_averaged(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Pool the runs over every degenerate position pair (i, j), i < j.

    Each pair uses the same replication seeds; the distances of all pairs are
    concatenated, so means and recovery rates are averages over positions.
    """
    K = cfg.K
    pooled = None
    for i in range(1, K + 1):
        for j in range(i + 1, K + 1):
            sub = run_synthetic(
                ExperimentConfig(
                    cfg.model, DegeneratePair(i, j), cfg.methods, cfg.sizes, cfg.replications, cfg.seed, False, cfg.policy
                ),
                jobs,
            )
            if pooled is None:
                pooled = sub
                continue
            for key in pooled.distances:
                pooled.distances[key] = np.concatenate([pooled.distances[key], sub.distances[key]])
                pooled.flags[key] = pooled.flags[key] | sub.flags[key]
    pooled.meta = dict(cfg.describe(), coarsening="averaged over all degenerate pairs")
    return pooled


@dataclass(frozen=True)
class ConsistencyOutcome:
    method: MethodId
    sizes: tuple[int, ...]
    rates: tuple[float, ...]
    standard_errors: tuple[float, ...]
    monotone: bool
    final_ok: bool
    threshold: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_ok

    def summary(self) -> str:
        rates = " ".join(f"N={n}:{r:.3f}" for n, r in zip(self.sizes, self.rates))
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.method}: recovery {rates} (need non-decreasing and >= {self.threshold} at N={self.sizes[-1]})"


def run_consistency_check(
    cfg: ExperimentConfig, threshold: float = 0.9, n_se: float = 2.0, jobs: int = 1, result: ExperimentResult | None = None
) -> dict[MethodId, ConsistencyOutcome]:
    """Exact-recovery rate must not drop by more than ``n_se`` standard errors between
    consecutive sample sizes and must reach ``threshold`` at the largest one."""
    res = result if result is not None else run_synthetic(cfg, jobs)
    R = cfg.replications
    out = {}
    for m in cfg.methods:
        rates = [res.recovery_rate(m, N) for N in cfg.sizes]
        ses = [math.sqrt(r * (1 - r) / R) for r in rates]
        monotone = all(
            b >= a - n_se * math.sqrt(sa**2 + sb**2)
            for a, b, sa, sb in zip(rates, rates[1:], ses, ses[1:])
        )
        out[m] = ConsistencyOutcome(m, cfg.sizes, tuple(rates), tuple(ses), monotone, rates[-1] >= threshold, threshold)
    return out


@dataclass(frozen=True)
class SignPatternResult:
    sizes: tuple[int, ...]
    fractions: tuple[float, ...]
    epsilon: float

    @property
    def first_size(self) -> int | None:
        """Smallest N at which the sign pattern was right in at least 1 - epsilon of replications."""
        for n, f in zip(self.sizes, self.fractions):
            if f >= 1 - self.epsilon:
                return n
        return None


def run_sign_pattern_check(
    theta: Sequence[float],
    spec: CoarseningSpec,
    epsilon: float,
    sizes: Sequence[int],
    replications: int = 200,
    seed: int = 0,
) -> SignPatternResult:
    """Per N, the fraction of replications in which p̂_ij > 1/2 exactly when theta_i > theta_j.

    A pair that was never observed counts as a wrong sign.
    """
    model = PLParams(tuple(theta))
    K = model.K
    sizes = tuple(int(n) for n in sizes)
    th = model.as_array()
    better = th[:, None] > th[None, :]
    hits = np.zeros(len(sizes))
    for r in range(replications):
        rng = replication_rng(seed, r)
        w, l = generate_pairwise_arrays(model, spec, sizes[-1], rng)
        counts = np.zeros((K, K), dtype=np.int64)
        start = 0
        for k, N in enumerate(sizes):
            counts = counts + _counts(w[start:N], l[start:N], K)
            start = N
            if np.all((counts > counts.T) == better):
                hits[k] += 1
    return SignPatternResult(sizes, tuple(hits / replications), epsilon)


@dataclass(frozen=True, eq=False)
class RankingDataset:
    """Complete orderings, one row per respondent, 1-based items listed best first."""

    array: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.array, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] == 0:
            raise DataError("ranking dataset is empty")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "array", a)

    @property
    def K(self) -> int:
        return self.array.shape[1]

    def __len__(self) -> int:
        return self.array.shape[0]

    @property
    def orderings(self):
        from .core import Ordering

        return [Ordering(tuple(row)) for row in self.array]


def load_dataset(
    path,
    prefix: int = 0,
    zero_indexed: bool = False,
    header_lines: int | str = 0,
    format: str | None = None,
) -> RankingDataset:
    """One ordering per line, best first, after ``prefix`` leading fields.

    ``format="sushi"`` reads the public sushi ``.order`` files: two prefix
    fields, 0-based items, and a leading header line. With
    ``header_lines="auto"`` leading lines with at most ``prefix`` fields are
    skipped.
    """
    if format is not None:
        if format.lower() != "sushi":
            raise DataError(f"unknown dataset format {format!r}")
        prefix, zero_indexed, header_lines = 2, True, "auto"
    rows = []
    K = None
    in_header = True
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if in_header:
                if header_lines == "auto" and len(parts) <= prefix:
                    continue
                if isinstance(header_lines, int) and lineno <= header_lines:
                    continue
                in_header = False
            try:
                items = [int(x) for x in parts[prefix:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer item in {s!r}") from None
            if zero_indexed:
                items = [x + 1 for x in items]
            if K is None:
                K = len(items)
            if len(items) != K or K == 0 or sorted(items) != list(range(1, K + 1)):
                raise DataError(f"{path}:{lineno}: not a complete ordering of {K or 0} items: {s!r}")
            rows.append(items)
    if not rows:
        raise DataError(f"{path}: no rankings found")
    return RankingDataset(np.array(rows, dtype=np.int64))


def synthetic_stand_in(n: int = 5000, K: int = 10, seed: int = 0, theta: Sequence[float] | None = None):
    """Complete PL rankings standing in for the sushi data; returns (dataset, model)."""
    if theta is None:
        theta = tuple(float(x) for x in np.exp(-0.3 * np.arange(K)))
    model = PLParams(tuple(theta))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**31,)))
    return RankingDataset(sample_orderings(model, n, rng) + 1), model


@dataclass
class RealExperimentResult:
    """Normalised Kendall distance to each method's own full-data ranking, per repetition."""

    spec: CoarseningSpec
    methods: tuple[MethodId, ...]
    targets: dict
    distances: dict
    flags: dict

    def median(self, method) -> float:
        v = self.distances[MethodId.parse(method)]
        v = v[~np.isnan(v)]
        return float(np.median(v)) if v.size else math.nan

    def mean(self, method) -> float:
        v = self.distances[MethodId.parse(method)]
        v = v[~np.isnan(v)]
        return float(v.mean()) if v.size else math.nan

    def failures(self, method) -> int:
        return int(np.isnan(self.distances[MethodId.parse(method)]).sum())


def run_real_experiment(
    data: RankingDataset,
    spec: CoarseningSpec,
    methods: Sequence[MethodId | str] = ALL_METHODS,
    repetitions: int = 100,
    seed: int = 0,
    policy: UndefinedPolicy | str = UndefinedPolicy.HALF,
) -> RealExperimentResult:
    """Coarsen every respondent's ranking to one pair and compare with the full-data target."""
    if repetitions < 1:
        raise DataError(f"repetitions must be >= 1, got {repetitions}")
    methods = tuple(MethodId.parse(m) for m in methods)
    K = data.K
    spec.validate(K)
    orderings = data.array - 1
    full = kernels.all_pair_counts(orderings, K)
    targets, flags = {}, {m: set() for m in methods}
    for m in methods:
        ranking, fl, _ = _evaluate(m, full, None, policy)
        targets[m] = ranking
        if ranking is None:
            flags[m].add("target_failed")
    distances = {m: np.full(repetitions, np.nan) for m in methods}
    rows = np.arange(len(data))
    for rep in range(repetitions):
        rng = replication_rng(seed, rep)
        a, b = sample_rank_pairs(spec, K, len(data), rng)
        counts = _counts(orderings[rows, a], orderings[rows, b], K)
        for m in methods:
            if targets[m] is None:
                continue
            ranking, fl, _ = _evaluate(m, counts, None, policy)
            flags[m] |= fl
            if ranking is not None:
                distances[m][rep] = normalized_kendall_distance(ranking, targets[m])
    return RealExperimentResult(spec, methods, targets, distances, {m: frozenset(f) for m, f in flags.items()})


def _fmt(x: float) -> str:
    return "nan" if x != x else repr(round(float(x), 12))


def summary_lines(res) -> list[str]:
    """The summary table of a synthetic or real run as CSV lines, header first."""
    if not isinstance(res, ExperimentResult):
        lines = [REAL_HEADER]
        for sub in res:
            for m in sub.methods:
                flags = ";".join(sorted(sub.flags[m]))
                lines.append(f"{m},{sub.spec},{_fmt(sub.median(m))},{_fmt(sub.mean(m))},{sub.failures(m)},{flags}")
        return lines
    lines = [RESULT_HEADER]
    for m in res.methods:
        for N in res.sizes:
            flags = ";".join(sorted(res.cell_flags(m, N)))
            lines.append(
                f"{m},{N},{_fmt(res.mean(m, N))},{_fmt(res.sd(m, N))},{_fmt(res.recovery_rate(m, N))},{flags}"
            )
    return lines


def export_results(res: ExperimentResult, path) -> list[Path]:
    """Write the summary CSV, a long-format companion ``<stem>_long.csv`` and ``<stem>_meta.json``."""
    path = Path(path)
    long_path = path.with_name(path.stem + "_long.csv")
    meta_path = path.with_name(path.stem + "_meta.json")
    lines = summary_lines(res)
    long_lines = ["method,N,replication,kendall,normalized_kendall"]
    denom = res.max_distance or 1
    for m in res.methods:
        for N in res.sizes:
            for r, d in enumerate(res.values(m, N)):
                long_lines.append(f"{m},{N},{r},{_fmt(d)},{_fmt(d / denom)}")
    try:
        path.write_text("\n".join(lines) + "\n")
        long_path.write_text("\n".join(long_lines) + "\n")
        meta_path.write_text(json.dumps(res.meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write results: {exc}") from None
    return [path, long_path, meta_path]



def export_real_results(results: Sequence[RealExperimentResult], path) -> list[Path]:
    path = Path(path)
    long_path = path.with_name(path.stem + "_long.csv")
    lines = summary_lines(results)
    long_lines = ["method,coarsening,repetition,normalized_kendall"]
    for res in results:
        for m in res.methods:
            for r, d in enumerate(res.distances[m]):
                long_lines.append(f"{m},{res.spec},{r},{_fmt(d)}")
    try:
        path.write_text("\n".join(lines) + "\n")
        long_path.write_text("\n".join(long_lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write results: {exc}") from None
    return [path, long_path]


# ---------------------------------------------------------------- configuration

CONFIG_DIR = Path(__file__).parent / "configs"

_ALIASES = {
    "theta": "model.theta",
    "k": "model.k",
    "phi": "model.phi",
    "mallows.phi": "model.phi",
    "reference": "model.reference",
    "mallows.reference": "model.reference",
    "repetitions": "reps",
    "replications": "reps",
    "model.type": "model",
    "experiment.type": "experiment",
}

_KNOWN = {
    "experiment", "model", "model.theta", "model.k", "model.phi", "model.reference",
    "coarsening", "methods", "sizes", "reps", "seed", "baseline", "policy",
    "data", "data.format", "data.prefix", "data.zero_indexed", "data.header",
    "distribution", "n",
}


@dataclass(frozen=True)
class RealExperimentConfig:
    data: str
    specs: tuple[CoarseningSpec, ...]
    methods: tuple[MethodId, ...] = ALL_METHODS
    repetitions: int = 100
    seed: int = 0
    policy: UndefinedPolicy = UndefinedPolicy.HALF
    data_format: str | None = None
    prefix: int = 0
    zero_indexed: bool = False
    header: int | str = 0
    base_dir: str | None = None
    all_pairs: bool = False

    def specs_for(self, K: int) -> tuple[CoarseningSpec, ...]:
        """The explicit specs, then every degenerate pair when ``all_pairs`` is set."""
        extra = [DegeneratePair(i, j) for i in range(1, K + 1) for j in range(i + 1, K + 1)] if self.all_pairs else []
        return tuple(self.specs) + tuple(extra)

    def load(self) -> RankingDataset:
        """The dataset; the path ``synthetic`` selects the stand-in generator."""
        if self.data.lower() == "synthetic":
            return synthetic_stand_in(seed=self.seed)[0]
        path = Path(self.data)
        if self.base_dir is not None and not path.is_absolute():
            path = Path(self.base_dir) / path
        if not path.exists():
            raise DataError(f"dataset {path} not found")
        return load_dataset(path, self.prefix, self.zero_indexed, self.header, self.data_format)


@dataclass(frozen=True)
class LoadedConfig:
    """A parsed configuration: exactly one of ``synthetic`` and ``real`` is set."""

    synthetic: ExperimentConfig | None = None
    averaged: bool = False
    real: RealExperimentConfig | None = None


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {s!r}")
        key, value = (x.strip() for x in s.split("=", 1))
        key = _ALIASES.get(key.lower(), key.lower())
        if key not in _KNOWN:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config_path(name) -> Path:
    """A file path, or the name of a bundled configuration."""
    path = Path(name)
    if path.exists():
        return path
    for cand in (CONFIG_DIR / name, CONFIG_DIR / f"{name}.cfg"):
        if cand.exists():
            return cand
    raise ConfigError(f"configuration {name!r} not found")


def _numbers(text: str, kind=float) -> tuple:
    try:
        return tuple(kind(float(x)) if kind is int else kind(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected numbers, got {text!r}") from None


def _int(text: str, key: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {text!r}") from None
    if v != int(v):
        raise ConfigError(f"{key} must be an integer, got {text!r}")
    return int(v)


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be true or false, got {text!r}")


def _resolve_file(name: str, base_dir) -> Path:
    path = Path(name)
    candidates = [path]
    if base_dir is not None and not path.is_absolute():
        candidates.append(Path(base_dir) / path)
    candidates.append(CONFIG_DIR / path.name)
    for cand in candidates:
        if cand.exists():
            return cand
    raise ConfigError(f"file {name!r} not found")


def _model(kv: dict, base_dir=None) -> Model:
    if "distribution" in kv:
        from .models import RankingDistribution

        try:
            return RankingDistribution.from_file(_resolve_file(kv["distribution"], base_dir))
        except DataError as exc:
            raise ConfigError(str(exc)) from None
    kind = kv.get("model", "pl").lower()
    if kind in ("pl", "plackett-luce", "plackett_luce"):
        if "model.theta" in kv:
            theta = _numbers(kv["model.theta"])
        else:
            theta = geometric_theta(_int(kv.get("model.k", "5"), "model.k"))
        if all(float(t).is_integer() for t in theta):
            theta = tuple(int(t) for t in theta)
        return PLParams(theta)
    if kind == "mallows":
        K = _int(kv.get("model.k", "0"), "model.k")
        if "model.reference" in kv:
            reference = Ranking(_numbers(kv["model.reference"], int))
        elif K > 0:
            reference = Ranking.identity(K)
        else:
            raise ConfigError("mallows model needs model.k or model.reference")
        return MallowsParams(reference, float(kv.get("model.phi", "1.0")))
    raise ConfigError(f"unknown model {kind!r}")


_ALL_PAIRS = ("degenerate all", "all pairs", "averaged")


def _coarsenings(text: str, K: int | None, base_dir) -> tuple[tuple[CoarseningSpec, ...], bool]:
    specs, averaged = [], False
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if part.lower() in _ALL_PAIRS:
            if K is None:
                raise ConfigError("'degenerate all' needs a known number of items")
            specs.extend(DegeneratePair(i, j) for i in range(1, K + 1) for j in range(i + 1, K + 1))
            averaged = True
        else:
            specs.append(parse_coarsening(part, base_dir))
    if not specs:
        raise ConfigError("no coarsening given")
    return tuple(specs), averaged


def build_config(kv: dict, base_dir=None) -> LoadedConfig:
    """Turn parsed key/value pairs into a validated experiment configuration."""
    norm = {}
    for key, value in kv.items():
        key = _ALIASES.get(key.lower(), key.lower())
        if key not in _KNOWN:
            raise ConfigError(f"unknown configuration key {key!r}")
        norm[key] = str(value)
    try:
        return _build_config(norm, base_dir)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def _build_config(kv: dict, base_dir) -> LoadedConfig:
    methods = tuple(parse_methods(kv.get("methods", "all")))
    seed = _int(kv.get("seed", "0"), "seed")
    policy = UndefinedPolicy.parse(kv.get("policy", "half"))
    kind = kv.get("experiment", "real" if "data" in kv else "synthetic").lower()
    if kind == "real":
        data = kv.get("data", "synthetic")
        header = kv.get("data.header", "0")
        header = "auto" if header.lower() == "auto" else _int(header, "data.header")
        # the item count of a data file is only known once it is read, so
        # "degenerate all" is expanded at run time
        parts = [x.strip() for x in kv.get("coarsening", "uniform; degenerate 1 2").split(";") if x.strip()]
        all_pairs = any(x.lower() in _ALL_PAIRS for x in parts)
        rest = "; ".join(x for x in parts if x.lower() not in _ALL_PAIRS)
        specs = _coarsenings(rest, None, base_dir)[0] if rest else ()
        reps = _int(kv.get("reps", "100"), "reps")
        if reps < 1:
            raise ConfigError(f"reps must be >= 1, got {reps}")
        real = RealExperimentConfig(
            data, specs, methods, reps, seed, policy,
            kv.get("data.format"),
            _int(kv.get("data.prefix", "0"), "data.prefix"),
            _bool(kv.get("data.zero_indexed", "false"), "data.zero_indexed"),
            header,
            None if base_dir is None else str(base_dir),
            all_pairs,
        )
        return LoadedConfig(real=real)
    if kind != "synthetic":
        raise ConfigError(f"unknown experiment type {kind!r}")
    model = _model(kv, base_dir)
    baseline = _bool(kv.get("baseline", "false"), "baseline")
    averaged = False
    spec = None
    if not baseline or "coarsening" in kv:
        specs, averaged = _coarsenings(kv.get("coarsening", "degenerate 1 2"), model.K, base_dir)
        if len(specs) > 1 and not averaged:
            raise ConfigError("synthetic runs take a single coarsening or 'degenerate all'")
        spec = specs[0]
    sizes = _numbers(kv.get("sizes", "100 1000 10000"), int)
    cfg = ExperimentConfig(
        model, spec, methods, sizes, _int(kv.get("reps", "500"), "reps"), seed, baseline, policy
    )
    return LoadedConfig(synthetic=cfg, averaged=averaged and not baseline)


def config_values(name=None, overrides: dict[str, str] | None = None) -> tuple[dict[str, str], Path | None]:
    """Key/value pairs of a configuration file (or bundled name) with overrides applied."""
    kv, base_dir = {}, None
    if name is not None:
        path = resolve_config_path(name)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        kv = parse_config_text(text, str(path))
        base_dir = path.parent
    if overrides:
        kv.update(parse_config_text("\n".join(f"{k} = {v}" for k, v in overrides.items()), "overrides"))
    return kv, base_dir


def model_from_values(kv: dict[str, str], base_dir=None) -> Model:
    try:
        return _model(kv, base_dir)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def coarsening_from_values(kv: dict[str, str], default: str, base_dir=None) -> CoarseningSpec:
    try:
        specs, averaged = _coarsenings(kv.get("coarsening", default), None, base_dir)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if len(specs) != 1:
        raise ConfigError("expected a single coarsening")
    return specs[0]


def load_config(name, overrides: dict[str, str] | None = None) -> LoadedConfig:
    """Read a configuration file (or bundled name) and apply ``key=value`` overrides."""
    kv, base_dir = config_values(name, overrides)
    return build_config(kv, base_dir)


def run_config(loaded: LoadedConfig, jobs: int = 1):
    """Run a loaded configuration; returns an ExperimentResult or a list of RealExperimentResult."""
    if loaded.real is not None:
        rc = loaded.real
        data = rc.load()
        specs = rc.specs_for(data.K)
        for spec in specs:
            try:
                spec.validate(data.K)
            except DataError as exc:
                raise ConfigError(str(exc)) from None
        return [run_real_experiment(data, s, rc.methods, rc.repetitions, rc.seed, rc.policy) for s in specs]
    if loaded.averaged:
        return run_averaged(loaded.synthetic, jobs)
    return run_synthetic(loaded.synthetic, jobs)


def export_any(result, path) -> list[Path]:
    if isinstance(result, ExperimentResult):
        return export_results(result, path)
    return export_real_results(result, path)
