import json
import math

import numpy as np
import pytest

from rankcoarse import bench
from rankcoarse.aggregate import ALL_METHODS, MethodId
from rankcoarse.coarsening import DegeneratePair, UniformPairs
from rankcoarse.core import ConfigError, DataError, Ordering
from rankcoarse.models import MallowsParams, PLParams
from rankcoarse.core import Ranking

PL5 = PLParams((16, 8, 4, 2, 1))
PL3 = PLParams((14, 5, 1))


def small_cfg(**kw):
    base = dict(model=PL3, coarsening=DegeneratePair(1, 2), methods=("BTL", "Copeland", "FAS"),
                sizes=(50, 200), replications=20, seed=5)
    base.update(kw)
    return bench.ExperimentConfig(**base)


# ---------------------------------------------------------------- configuration


def test_config_validation():
    with pytest.raises(ConfigError):
        small_cfg(replications=0)
    with pytest.raises(ConfigError):
        small_cfg(sizes=(200, 50))
    with pytest.raises(ConfigError):
        small_cfg(sizes=(100, 100))
    with pytest.raises(ConfigError):
        small_cfg(coarsening=None)
    with pytest.raises(ConfigError):
        small_cfg(coarsening=DegeneratePair(1, 4))
    assert small_cfg(coarsening=None, baseline=True).baseline


def test_describe_records_theta_and_truth():
    d = small_cfg().describe()
    assert d["model"]["theta"] == [14.0, 5.0, 1.0]
    assert d["ground_truth"] == [1, 2, 3]
    assert d["replications"] == 20


def test_geometric_default_weights():
    assert bench.geometric_theta(4) == (8, 4, 2, 1)


def test_replication_seeds_documented_rule():
    a = bench.replication_rng(7, 3).integers(0, 2**62, 4)
    b = np.random.default_rng(np.random.SeedSequence(7, spawn_key=(3,))).integers(0, 2**62, 4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, bench.replication_rng(7, 4).integers(0, 2**62, 4))


# ---------------------------------------------------------------- synthetic runs


def test_determinism_and_parallel_reduction():
    cfg = small_cfg()
    a, b = bench.run_synthetic(cfg), bench.run_synthetic(cfg)
    c = bench.run_synthetic(cfg, jobs=2)
    for key in a.distances:
        assert np.array_equal(a.distances[key], b.distances[key], equal_nan=True)
        assert np.array_equal(a.distances[key], c.distances[key], equal_nan=True)
    assert bench.summary_lines(a) == bench.summary_lines(c)


def test_replication_independence():
    full = bench.run_synthetic(small_cfg(replications=100, sizes=(100,)))
    half = bench.run_synthetic(small_cfg(replications=50, sizes=(100,)))
    for m in half.methods:
        assert np.array_equal(full.values(m, 100)[:50], half.values(m, 100), equal_nan=True)


def test_result_invariants():
    res = bench.run_synthetic(small_cfg(sizes=(20, 100, 400)))
    top = PL3.K * (PL3.K - 1) // 2
    for m in res.methods:
        for N in res.sizes:
            v = res.values(m, N)
            ok = v[~np.isnan(v)]
            assert np.all((ok >= 0) & (ok <= top))
            rate = res.recovery_rate(m, N)
            assert 0 <= rate <= 1
            assert rate == np.count_nonzero(v == 0) / len(v)
            assert res.failures(m, N) == np.count_nonzero(np.isnan(v))


def test_failures_are_recorded_not_fatal():
    res = bench.run_synthetic(small_cfg(methods=("BTL",), sizes=(3,), replications=30))
    assert res.failures("BTL", 3) > 0
    assert "failed" in res.cell_flags("BTL", 3)
    assert math.isnan(res.sd("BTL", 3)) or res.sd("BTL", 3) >= 0


def test_mallows_runs_against_reference():
    model = MallowsParams(Ranking((2, 1, 3)), 0.3)
    res = bench.run_synthetic(small_cfg(model=model, methods=("Copeland",), sizes=(2000,), replications=10))
    assert res.recovery_rate("Copeland", 2000) == 1.0


def test_uniform_copeland_recovers():
    cfg = bench.ExperimentConfig(PL3, UniformPairs(), ("Copeland",), (100_000,), 100, seed=11)
    res = bench.run_synthetic(cfg)
    assert np.count_nonzero(res.values("Copeland", 100_000) == 0) >= 95


def test_neighbouring_positions_measured_direction():
    # Frozen in the measured direction: the bottom-pair q' table equals the BTL
    # table exactly, while the top pair shrinks weak-item cells towards 1/2.
    out = {}
    for pair in [(1, 2), (4, 5)]:
        cfg = bench.ExperimentConfig(PL5, DegeneratePair(*pair), ("BTL",), (1000,), 100, seed=1)
        out[pair] = bench.run_synthetic(cfg).mean("BTL", 1000)
    assert out[(1, 2)] > out[(4, 5)]
    from rankcoarse.coarsening import exact_q
    from rankcoarse.models import pairwise_marginals

    assert exact_q(PL5, DegeneratePair(4, 5)).unbiased_against(pairwise_marginals(PL5))
    assert not exact_q(PL5, DegeneratePair(1, 2)).unbiased_against(pairwise_marginals(PL5))


def test_baseline_no_worse_than_coarsened():
    kw = dict(model=PLParams((8, 4, 2, 1)), methods=("BTL", "Borda", "Copeland"), sizes=(200, 1000), replications=60, seed=2)
    base = bench.run_synthetic(bench.ExperimentConfig(coarsening=None, baseline=True, **kw))
    coarse = bench.run_synthetic(bench.ExperimentConfig(coarsening=DegeneratePair(1, 2), **kw))
    for m in base.methods:
        for N in base.sizes:
            se = math.hypot(base.se(m, N), coarse.se(m, N))
            assert base.mean(m, N) <= coarse.mean(m, N) + se


def test_averaged_pools_all_pairs():
    cfg = bench.ExperimentConfig(PL3, DegeneratePair(1, 2), ("Borda",), (100,), 10, seed=4)
    res = bench.run_averaged(cfg)
    assert len(res.values("Borda", 100)) == 30
    parts = [bench.run_synthetic(bench.ExperimentConfig(PL3, DegeneratePair(i, j), ("Borda",), (100,), 10, seed=4))
             for i, j in [(1, 2), (1, 3), (2, 3)]]
    assert np.array_equal(res.values("Borda", 100), np.concatenate([p.values("Borda", 100) for p in parts]))


# ---------------------------------------------------------------- consistency and sign checks


def test_consistency_two_items():
    cfg = bench.ExperimentConfig(PLParams((3, 1)), DegeneratePair(1, 2), ALL_METHODS, (10, 100, 1000), 100, seed=0)
    out = bench.run_consistency_check(cfg, threshold=0.99)
    for m, o in out.items():
        assert o.passed, o.summary()
        assert o.rates[-1] == 1.0


def test_consistency_reference_setting():
    cfg = bench.ExperimentConfig(PL3, DegeneratePair(1, 2), ("Copeland", "FAS_B"), (1000, 10000, 100000), 100, seed=0)
    out = bench.run_consistency_check(cfg)
    for o in out.values():
        assert o.passed, o.summary()
        assert o.summary().startswith("PASS")


def test_consistency_reports_shortfall():
    cfg = bench.ExperimentConfig(PL5, DegeneratePair(1, 2), ("Copeland",), (100, 1000), 40, seed=0)
    o = bench.run_consistency_check(cfg)[MethodId.COPELAND]
    assert not o.final_ok and not o.passed
    assert "FAIL" in o.summary()


def test_sign_pattern_reaches_threshold():
    res = bench.run_sign_pattern_check((14, 5, 1), DegeneratePair(1, 2), 0.05, (1000, 10000, 100000), replications=100)
    assert res.first_size is not None
    assert all(b >= a - 0.05 for a, b in zip(res.fractions, res.fractions[1:]))


def test_sign_pattern_uniform_not_slower():
    sizes = (100, 300, 1000, 3000, 10000, 30000)
    uni = bench.run_sign_pattern_check((14, 5, 1), UniformPairs(), 0.05, sizes, replications=100, seed=1)
    deg = bench.run_sign_pattern_check((14, 5, 1), DegeneratePair(2, 3), 0.05, sizes, replications=100, seed=1)
    assert uni.first_size is not None
    assert deg.first_size is None or uni.first_size <= deg.first_size


def test_sign_pattern_two_items():
    res = bench.run_sign_pattern_check((2, 1), DegeneratePair(1, 2), 0.05, (5, 50, 500), replications=200)
    assert res.fractions[0] < res.fractions[1] <= res.fractions[2] == 1.0


# ---------------------------------------------------------------- datasets


def test_load_sushi_line(tmp_path):
    f = tmp_path / "sushi3a.5000.10.order"
    f.write_text("10 1\n0 10 7 6 0 2 1 3 8 9 4 5\n")
    ds = bench.load_dataset(f, format="sushi")
    assert ds.orderings == [Ordering((8, 7, 1, 3, 2, 4, 9, 10, 5, 6))]
    f2 = tmp_path / "plain"
    f2.write_text("0 10 7 6 0 2 1 3 8 9 4 5\n")
    ds2 = bench.load_dataset(f2, prefix=2, zero_indexed=True)
    assert ds2.orderings == ds.orderings


def test_load_plain_and_errors(tmp_path):
    f = tmp_path / "r.txt"
    f.write_text("1 2 3\n")
    ds = bench.load_dataset(f)
    assert ds.orderings == [Ordering((1, 2, 3))] and ds.K == 3 and len(ds) == 1
    empty = tmp_path / "e.txt"
    empty.write_text("")
    with pytest.raises(DataError):
        bench.load_dataset(empty)
    bad = tmp_path / "b.txt"
    bad.write_text("1 2 3\n1 1 3\n")
    with pytest.raises(DataError, match=":2:"):
        bench.load_dataset(bad)
    with pytest.raises(DataError):
        bench.load_dataset(f, format="csv")


def test_stand_in_btl_target():
    data, model = bench.synthetic_stand_in(n=5000, K=10, seed=0)
    res = bench.run_real_experiment(data, DegeneratePair(1, 2), ("BTL",), repetitions=2, seed=0)
    assert res.targets[MethodId.BTL] == Ranking(tuple(range(1, 11)))


def test_real_experiment_deterministic_single_repetition():
    data, _ = bench.synthetic_stand_in(n=500, K=5, seed=3)
    a = bench.run_real_experiment(data, UniformPairs(), ("Borda", "FAS"), repetitions=1, seed=9)
    b = bench.run_real_experiment(data, UniformPairs(), ("Borda", "FAS"), repetitions=1, seed=9)
    for m in a.methods:
        assert np.array_equal(a.distances[m], b.distances[m], equal_nan=True)
        assert 0 <= a.median(m) <= 1
    with pytest.raises(DataError):
        bench.run_real_experiment(data, UniformPairs(), ("Borda",), repetitions=0)


# ---------------------------------------------------------------- export


def test_export_format_and_determinism(tmp_path):
    res = bench.run_synthetic(small_cfg())
    paths = bench.export_results(res, tmp_path / "out.csv")
    text = paths[0].read_text()
    assert text.splitlines()[0] == "method,N,mean_kendall,sd_kendall,recovery_rate,flags"
    assert len(text.splitlines()) == 1 + 3 * 2
    assert paths[1].read_text().splitlines()[0].startswith("method,N,replication")
    assert json.loads(paths[2].read_text())["seed"] == 5
    again = bench.export_results(res, tmp_path / "again.csv")
    for p, q in zip(paths, again):
        assert p.read_bytes() == q.read_bytes()


def test_export_empty_methods(tmp_path):
    res = bench.run_synthetic(small_cfg(methods=()))
    p = bench.export_results(res, tmp_path / "e.csv")[0]
    assert p.read_text() == bench.RESULT_HEADER + "\n"


def test_export_unwritable(tmp_path):
    res = bench.run_synthetic(small_cfg(methods=()))
    with pytest.raises(DataError):
        bench.export_results(res, tmp_path / "missing" / "x.csv")


# ---------------------------------------------------------------- config files


def test_bundled_configs_parse():
    for name in ["paper-fig-synthetic", "averaged-positions", "mallows-synthetic", "real-sushi"]:
        loaded = bench.load_config(name)
        assert loaded.synthetic or loaded.real
    fig = bench.load_config("paper-fig-synthetic.cfg").synthetic
    assert fig.model.theta == (16, 8, 4, 2, 1) and fig.replications == 500 and fig.seed == 2017
    assert bench.load_config("averaged-positions").averaged


def test_config_text_and_overrides():
    kv = bench.parse_config_text("# comment\nmodel.theta = 3 2 1\ncoarsening = uniform\nreps = 4\nsizes = 10 20\n")
    loaded = bench.build_config(kv)
    cfg = loaded.synthetic
    assert cfg.model.theta == (3, 2, 1) and isinstance(cfg.coarsening, UniformPairs)
    assert cfg.replications == 4 and cfg.sizes == (10, 20)
    loaded = bench.load_config("paper-fig-synthetic", {"reps": "3", "sizes": "10"})
    assert loaded.synthetic.replications == 3


@pytest.mark.parametrize("text", [
    "theta = 1 -2\n",
    "theta = 3 2 1\nreps = zero\n",
    "theta = 3 2 1\nbogus = 1\n",
    "theta = 3 2 1\nsizes = 10 5\n",
    "theta = 3 2 1\ncoarsening = degenerate 1 7\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        bench.build_config(bench.parse_config_text(text))


def test_missing_config():
    with pytest.raises(ConfigError):
        bench.load_config("no-such-config")


def test_real_config_expands_all_pairs_from_data(tmp_path):
    f = tmp_path / "s.order"
    f.write_text("4 1\n0 4 0 1 2 3\n0 4 1 0 3 2\n0 4 0 2 1 3\n")
    loaded = bench.load_config("real-sushi", {"data": str(f), "data.format": "sushi", "reps": "1", "methods": "borda"})
    out = bench.run_config(loaded)
    assert [str(r.spec) for r in out][:2] == ["uniform", "degenerate 1 2"]
    assert len(out) == 1 + 6
