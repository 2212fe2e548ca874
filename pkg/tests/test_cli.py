import subprocess
import sys
import time
from collections import Counter

import pytest

from rankcoarse.cli import EXIT_DATA, EXIT_OK, EXIT_PROPERTY, EXIT_USAGE, main

REF = ["theta=14 5 1", "coarsening=degenerate 1 2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("".join(f"{line}\n" for line in lines))
    return str(p)


# ---------------------------------------------------------------- generate


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    code, _, err = run(capsys, "generate", *REF, "n=1000", "--seed", "7", "--out", str(a))
    assert code == EXIT_OK and "ground truth: 1 2 3" in err
    assert run(capsys, "generate", *REF, "n=1000", "--seed", "7", "--out", str(b))[0] == EXIT_OK
    assert len(a.read_text().splitlines()) == 1000
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "generate", *REF, "n=1000", "--seed", "7")
    assert out == a.read_text()


def test_generate_single_item(capsys):
    code, _, err = run(capsys, "generate", "theta=1", "n=10")
    assert code == EXIT_USAGE and "pairs" in err


def test_generate_uniform_symmetric(capsys):
    code, out, _ = run(capsys, "generate", "theta=1 1 1", "coarsening=uniform", "n=60000", "--seed", "1")
    assert code == EXIT_OK
    freq = Counter(out.splitlines())
    assert len(freq) == 6
    for v in freq.values():
        assert abs(v / 60000 - 1 / 6) < 0.01


# ---------------------------------------------------------------- aggregate


@pytest.mark.parametrize("method", ["copeland", "fas", "btl", "borda", "ht"])
def test_aggregate_majority(tmp_path, capsys, method):
    f = write(tmp_path, "p.txt", ["1 2"] * 3 + ["2 1"])
    code, out, _ = run(capsys, "aggregate", f, "--method", method)
    assert code == EXIT_OK and out.splitlines()[0] == "1 2"


def test_aggregate_scores(tmp_path, capsys):
    f = write(tmp_path, "p.txt", ["1 2"] * 3 + ["2 1"])
    code, out, _ = run(capsys, "aggregate", f, "--method", "btl", "--scores")
    assert out.splitlines()[1].startswith("scores: 0.75")
    code, out, _ = run(capsys, "aggregate", f, "--method", "fas", "--scores")
    assert code == EXIT_OK and out.splitlines()[1].startswith("scores: none")


def test_aggregate_btl_disconnected(tmp_path, capsys):
    f = write(tmp_path, "p.txt", ["# items: 3", "1 2", "1 2", "2 1"])
    code, _, err = run(capsys, "aggregate", f, "--method", "btl")
    assert code == EXIT_DATA and "connected" in err
    f = write(tmp_path, "q.txt", ["1 2", "2 1"])
    code, _, err = run(capsys, "aggregate", f, "--method", "btl", "k=3")
    assert code == EXIT_DATA and "connected" in err


def test_aggregate_errors(tmp_path, capsys):
    f = write(tmp_path, "p.txt", ["1 2"])
    assert run(capsys, "aggregate", f, "--method", "nope")[0] == EXIT_DATA
    assert run(capsys, "aggregate", str(tmp_path / "missing.txt"), "--method", "btl")[0] == EXIT_DATA
    assert run(capsys, "aggregate", f)[0] == EXIT_USAGE
    bad = write(tmp_path, "bad.txt", ["1 x"])
    assert run(capsys, "aggregate", bad, "--method", "borda")[0] == EXIT_DATA


def test_unknown_flag_and_missing_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--bogus"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE


# ---------------------------------------------------------------- oracle


def test_oracle_reference_table(capsys):
    code, out, _ = run(capsys, "oracle", *REF)
    assert code == EXIT_OK
    for frag in ["665/1140", "133/1140", "19/1140", "266/1140", "42/1140", "15/1140",
                 "665/931", "133/175", "19/34"]:
        assert frag in out
    assert "order preserved" in out


def test_oracle_uniform_unbiased(capsys):
    code, out, _ = run(capsys, "oracle", "theta=14 5 1", "coarsening=uniform")
    assert code == EXIT_OK and "q′ = p (unbiased)" in out


def test_oracle_decimal_output(capsys):
    code, out, _ = run(capsys, "oracle", "theta=1.5 1 0.5")
    assert code == EXIT_OK and "0.600000000000" in out


def test_oracle_counterexample(capsys):
    code, out, _ = run(capsys, "oracle", "distribution=order-reversal-counterexample.dist", "coarsening=degenerate 2 3")
    assert code == EXIT_OK and "order violated" in out


def test_oracle_too_many_items(capsys):
    code, _, err = run(capsys, "oracle", "k=11")
    assert code == EXIT_DATA and "K <=" in err


# ---------------------------------------------------------------- experiment


def test_experiment_bundled_config(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    args = ["experiment", "--config", "paper-fig-synthetic", "reps=2", "sizes=100 1000", "--out", str(out)]
    assert run(capsys, *args)[0] == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "method,N,mean_kendall,sd_kendall,recovery_rate,flags"
    assert len(lines) == 1 + 15 * 2
    again = tmp_path / "again.csv"
    args[-1] = str(again)
    assert run(capsys, *args)[0] == EXIT_OK
    assert out.read_bytes() == again.read_bytes()


def test_experiment_jobs_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["experiment", "--config", "mallows-synthetic", "reps=6", "sizes=200", "--seed", "3"]
    assert run(capsys, *base, "--out", str(a))[0] == EXIT_OK
    assert run(capsys, *base, "--jobs", "2", "--out", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_experiment_config_errors(capsys):
    code, _, err = run(capsys, "experiment", "--config", "paper-fig-synthetic", "reps=0")
    assert code == EXIT_USAGE and "replications" in err
    assert run(capsys, "experiment", "--config", "does-not-exist")[0] == EXIT_USAGE
    assert run(capsys, "experiment")[0] == EXIT_USAGE


def test_experiment_real_stand_in(capsys):
    code, out, _ = run(capsys, "experiment", "--config", "real-sushi", "reps=2", "methods=borda copeland")
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("method,coarsening,median_normalized_kendall")


# ---------------------------------------------------------------- check


def test_check_default(capsys):
    code, out, _ = run(capsys, "check")
    assert code == EXIT_OK and "checks passed" in out


def test_check_quick_is_fast(capsys):
    t = time.perf_counter()
    code, out, _ = run(capsys, "check", "--quick")
    assert code == EXIT_OK
    assert time.perf_counter() - t < 60


def test_check_expect_violation(capsys):
    assert run(capsys, "check", "--expect-violation")[0] == EXIT_OK
    # the same distribution without the flag is a failing property
    code, _, err = run(capsys, "check", "distribution=order-reversal-counterexample.dist", "coarsening=degenerate 2 3")
    assert code == EXIT_PROPERTY and "failing properties" in err
    # a PL model under --expect-violation fails because order is preserved
    code, _, _ = run(capsys, "check", "--expect-violation", "theta=3 2 1")
    assert code == EXIT_PROPERTY


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rankcoarse.cli", "oracle", *REF], capture_output=True, text=True)
    assert proc.returncode == 0 and "665/1140" in proc.stdout
