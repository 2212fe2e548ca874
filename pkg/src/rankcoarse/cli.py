"""``rankcoarse`` command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 failed property check.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

import numpy as np

from . import bench, checks
from .aggregate import MethodId, aggregate_detailed
from .coarsening import MAX_EXACT_K, check_order_preservation, exact_q, generate_pairwise_arrays
from .core import (
    ConfigError,
    DataError,
    RankCoarseError,
    UndefinedPolicy,
    build_comparison_matrix,
    read_preference_file,
)
from .models import PLParams, RankingDistribution, ground_truth, pairwise_marginals

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PROPERTY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _overrides(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _ordering(ranking) -> str:
    return " ".join(str(i) for i in ranking.ordering.items)


def _model_and_values(args, default_coarsening: str):
    kv, base_dir = bench.config_values(args.config, _overrides(args.overrides))
    if args.seed is not None:
        kv["seed"] = str(args.seed)
    model = bench.model_from_values(kv, base_dir)
    spec = bench.coarsening_from_values(kv, default_coarsening, base_dir)
    return model, spec, kv


def cmd_generate(args) -> int:
    model, spec, kv = _model_and_values(args, "degenerate 1 2")
    if model.K < 2:
        raise ConfigError(f"no item pairs exist for K={model.K}")
    if not spec.is_pairwise:
        raise ConfigError(f"coarsening {spec} does not produce pairwise preferences")
    spec.validate(model.K)
    n = bench._int(kv.get("n", "1000"), "n")
    if n < 0:
        raise ConfigError(f"n must be non-negative, got {n}")
    rng = np.random.default_rng(bench._int(kv.get("seed", "0"), "seed"))
    w, l = generate_pairwise_arrays(model, spec, n, rng)
    text = "".join(f"{a} {b}\n" for a, b in zip((w + 1).tolist(), (l + 1).tolist()))
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)
    print(f"ground truth: {_ordering(ground_truth(model))}", file=sys.stderr)
    return EXIT_OK


def cmd_aggregate(args) -> int:
    if not args.method:
        raise UsageError("--method is required")
    method = MethodId.parse(args.method)
    kv = _overrides(args.overrides)
    unknown = set(kv) - {"k", "policy"}
    if unknown:
        raise UsageError(f"unknown override(s) {sorted(unknown)} for aggregate")
    prefs, K = read_preference_file(args.file)
    if "k" in kv:
        K = bench._int(kv["k"], "k")
    if K is None:
        K = max((max(p.winner, p.loser) for p in prefs), default=0)
    if K < 1:
        raise DataError(f"{args.file}: no preferences and no item count")
    policy = UndefinedPolicy.parse(kv.get("policy", args.policy))
    res = aggregate_detailed(method, build_comparison_matrix(prefs, K), policy)
    print(_ordering(res.ranking))
    if args.scores:
        if res.scores is None:
            print(f"scores: none ({method} returns an ordering only)")
        else:
            print("scores: " + " ".join(f"{s:.10g}" for s in res.scores))
    if res.flags:
        print("note: " + ", ".join(sorted(res.flags)), file=sys.stderr)
    return EXIT_OK


def _lcm_denominator(values) -> int:
    return math.lcm(*(Fraction(v).denominator for v in values)) if values else 1


def _oracle_lines(model, spec) -> list[str]:
    K = model.K
    if K > MAX_EXACT_K:
        raise DataError(f"exact tables need K <= {MAX_EXACT_K}, got {K}")
    exact = (isinstance(model, PLParams) and model.is_integral) or (
        isinstance(model, RankingDistribution) and model.is_rational
    )
    if isinstance(model, PLParams) and exact:
        model = PLParams(tuple(int(t) for t in model.theta))
    table = exact_q(model, spec, exact=exact)
    p = pairwise_marginals(model, exact=exact)
    pairs = [(i, j) for i in range(K) for j in range(K) if i < j] + [
        (i, j) for i in range(K) for j in range(K) if i > j
    ]
    lines = [f"items: {K}", f"model: {_describe_model(model)}", f"coarsening: {spec}"]
    if exact:
        dp = _lcm_denominator([p[i, j] for i, j in pairs])
        dq = _lcm_denominator([table.q[i, j] for i, j in pairs])
        lines.append(f"common denominators: p {dp}, q {dq}; q' shown as q_ij / (q_ij + q_ji)")

        def frac(x, d):
            return f"{int(Fraction(x) * d)}/{d}"

        def qp(i, j):
            if not table.defined[i, j]:
                return "undefined"
            num, den = int(table.q[i, j] * dq), int((table.q[i, j] + table.q[j, i]) * dq)
            return f"{num}/{den}"
    else:

        def frac(x, d):
            return f"{float(x):.12f}"

        def qp(i, j):
            return f"{table.qprime[i, j]:.12f}" if table.defined[i, j] else "undefined"

        dp = dq = None
    lines.append(f"{'pair':<6} {'p_ij':>16} {'q_ij':>16} {'qprime_ij':>16}")
    for i, j in pairs:
        lines.append(f"{i + 1},{j + 1:<4} {frac(p[i, j], dp):>16} {frac(table.q[i, j], dq):>16} {qp(i, j):>16}")
    if table.unbiased_against(p):
        lines.append("q′ = p (unbiased)")
    else:
        lines.append("q′ != p (coarsening introduces bias)")
    lines.append(check_order_preservation(model, spec).summary())
    return lines


def _describe_model(model) -> str:
    if isinstance(model, PLParams):
        return "PL theta = " + " ".join(str(t) for t in model.theta)
    if isinstance(model, RankingDistribution):
        return f"ranking distribution on {len(model.probs)} rankings"
    return f"Mallows reference {model.reference}, phi = {model.dispersion}"


def cmd_oracle(args) -> int:
    model, spec, _ = _model_and_values(args, "degenerate 1 2")
    if not spec.is_pairwise:
        raise ConfigError(f"coarsening {spec} is not pairwise")
    spec.validate(model.K)
    for line in _oracle_lines(model, spec):
        print(line)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if not args.config:
        raise UsageError("--config is required")
    overrides = _overrides(args.overrides)
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    loaded = bench.load_config(args.config, overrides)
    result = bench.run_config(loaded, jobs=args.jobs)
    if args.out:
        for path in bench.export_any(result, args.out):
            print(f"wrote {path}", file=sys.stderr)
    else:
        print("\n".join(bench.summary_lines(result)))
    return EXIT_OK


def cmd_check(args) -> int:
    overrides = _overrides(args.overrides)
    seed = args.seed or 0
    if args.expect_violation or overrides or args.config:
        kv, base_dir = bench.config_values(args.config, overrides)
        if args.expect_violation and not any(k == "distribution" or k.startswith("model") for k in kv):
            kv["distribution"] = "order-reversal-counterexample.dist"
            kv.setdefault("coarsening", "degenerate 2 3")
        model = bench.model_from_values(kv, base_dir)
        spec = bench.coarsening_from_values(kv, "degenerate 1 2", base_dir)
        results = [checks.check_counterexample(model, spec, expect_violation=args.expect_violation)]
    else:
        results = checks.run_checks(quick=args.quick, seed=seed, jobs=args.jobs)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failing properties: " + ", ".join(failed), file=sys.stderr)
        return EXIT_PROPERTY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankcoarse", description="Rank aggregation from coarsened pairwise data.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="configuration file or bundled configuration name")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")

    p = sub.add_parser("generate", help="sample coarsened pairwise preferences")
    common(p)
    p.add_argument("--out", help="output preference file (default: standard output)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("aggregate", help="aggregate a preference file into a ranking")
    p.add_argument("file", help="preference file with one 'winner loser' pair per line")
    p.add_argument("--method", help="aggregation method, e.g. btl, copeland, fas")
    p.add_argument("--scores", action="store_true", help="also print the score vector")
    p.add_argument("--policy", default="half", help="undefined-cell policy: half, zero or skip")
    p.add_argument("overrides", nargs="*", metavar="key=value", help="k=K to declare the number of items")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("oracle", help="print exact p, q and q' tables")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a configured Monte Carlo experiment")
    common(p)
    p.add_argument("--out", help="result CSV path (default: print the summary)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("check", help="run the property suites")
    common(p)
    p.add_argument("--quick", action="store_true", help="smaller instance counts")
    p.add_argument("--expect-violation", action="store_true", help="pass only if order preservation fails")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    # key=value overrides may follow options; anything else is a usage error
    stray = [x for x in extra if x.startswith("-") or "=" not in x]
    if stray:
        parser.error(f"unrecognized arguments: {' '.join(stray)}")
    args.overrides = list(getattr(args, "overrides", None) or []) + extra
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"rankcoarse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RankCoarseError, ValueError, OSError) as exc:
        print(f"rankcoarse: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
