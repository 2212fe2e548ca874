"""Time the compiled kernels against the numpy fallback.

Run ``python benchmarks/bench_kernels.py [--repeat R]``. Each row reports the
best of R wall-clock timings per backend on identical inputs, plus an
end-to-end synthetic experiment with each backend forced via the
``RANKCOARSE_PURE_PYTHON`` switch.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from rankcoarse import kernels
from rankcoarse.models import _insertion_table, enumerate_orderings


def cases(rng):
    K = 10
    theta = np.exp(rng.normal(size=K))
    u = rng.random((100_000, K))
    ref = rng.permutation(K).astype(np.int64)
    cum = _insertion_table(K, 0.5)
    orders = np.argsort(rng.random((100_000, K)), axis=1).astype(np.int64)
    ia, ib = np.triu_indices(K, 1)
    pick = rng.integers(0, len(ia), len(orders))
    a, b = ia[pick].astype(np.int64), ib[pick].astype(np.int64)
    o7 = enumerate_orderings(7)
    p7 = np.full(len(o7), 1.0 / len(o7))
    lam7 = np.triu(np.ones((7, 7)), 1)
    lam7 /= lam7.sum()
    w12 = rng.random((12, 12))
    np.fill_diagonal(w12, 0.0)
    c = rng.integers(1, 50, (K, K)).astype(float)
    np.fill_diagonal(c, 0.0)
    n = c + c.T
    r = c / np.where(n > 0, n, 1)
    t0 = np.full(K, 1.0 / K)
    return [
        ("pl_sample_orderings 1e5 x 10", "pl_sample_orderings", (theta, u)),
        ("rim_sample_orderings 1e5 x 10", "rim_sample_orderings", (ref, cum, u)),
        ("pair_counts 1e5", "pair_counts", (orders, a, b, K)),
        ("all_pair_counts 1e5 x 10", "all_pair_counts", (orders, K)),
        ("q_accumulate K=7", "q_accumulate", (o7, p7, lam7)),
        ("fas_dp K=12", "fas_dp", (w12,)),
        ("btl_mm K=10", "btl_mm", (c, t0, 1e-10, 100_000)),
        ("ht_fixed_point K=10", "ht_fixed_point", (n, r, t0, 1e-10, 100_000)),
    ]


def time_kernels(repeat):
    rng = np.random.default_rng(0)
    backends = {"python": kernels.get_backend("python")}
    if kernels.compiled_available():
        backends["compiled"] = kernels.get_backend("compiled")
    print(f"{'kernel':<32}" + "".join(f"{b:>12}" for b in backends) + f"{'speed-up':>10}")
    for label, name, args in cases(rng):
        times = {}
        for b, mod in backends.items():
            fn = getattr(mod, name)
            times[b] = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
        row = f"{label:<32}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


END_TO_END = (
    "import time; from rankcoarse import bench, BACKEND; "
    "from rankcoarse.coarsening import DegeneratePair; from rankcoarse.models import PLParams; "
    "cfg = bench.ExperimentConfig(PLParams((16, 8, 4, 2, 1)), DegeneratePair(1, 2), "
    "sizes=(100, 1000, 10000), replications=50, seed=0); "
    "t = time.perf_counter(); bench.run_synthetic(cfg); print(BACKEND, time.perf_counter() - t)"
)


def time_end_to_end():
    print("\nend-to-end: 15 methods, K=5, N up to 1e4, 50 replications")
    for flag in ("", "1"):
        env = dict(os.environ, RANKCOARSE_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<10} {float(secs):8.2f}s")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()
    time_kernels(args.repeat)
    if not args.skip_end_to_end:
        time_end_to_end()


if __name__ == "__main__":
    main()
