"""Command line entry point: ``oasis-dfe {groups,optimize,estimate,bench,tables}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import bench, grouping, lp, oasis_gt, states
from .measurement import make_rng

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parse_target(spec: str, n: int) -> np.ndarray:
    if spec in ("ghz", "w"):
        return bench.make_target(spec, n)
    if spec.startswith("haar-seed:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise bench.ConfigError(f"bad haar seed in {spec!r}") from None
        return states.make_haar(n, seed)
    raise bench.ConfigError(f"target must be ghz, w or haar-seed:S, got {spec!r}")


def cmd_groups(args) -> int:
    result = bench.group_report(args.target, args.n, args.method)
    text = f"# groups {result.num_groups}\n" + result.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(result.num_groups)
    else:
        sys.stdout.write(text)
    return 0


def cmd_optimize(args) -> int:
    O = _parse_target(args.target, args.n)
    povm = oasis_gt.build_pauli_povm(args.n)
    weights, law, objective = oasis_gt.optimize_weights(
        povm, O, method=args.method, allow_large=args.allow_large
    )
    weights.save(args.out)
    print(f"objective {float(objective)!r}")
    print(f"settings_used {len(law.support)}")
    return 0


def cmd_estimate(args) -> int:
    weights = oasis_gt.WeightTable.load(args.weights)
    n = weights.n
    if args.state:
        rho = states.load_density_matrix(args.state)
        O = _parse_target(args.target, n)
    else:
        O = _parse_target(args.target, n)
        rho = states.depolarize(O, args.noise)
    if oasis_gt.reconstruction_error(weights, O) > 1e-6:
        raise bench.ConfigError("weights do not reconstruct the given target")
    law = oasis_gt.SamplingLaw.from_weights(weights)
    report = oasis_gt.gt_estimate(rho, weights, law, args.shots, make_rng(args.seed))
    print(f"estimate {float(report.estimate)!r}")
    print(f"exact {float(states.exact_fidelity(rho, O))!r}")
    print(f"shots {report.shots_used}")
    return 0


def _override(config: bench.ExperimentConfig, args) -> bench.ExperimentConfig:
    data = vars(config).copy()
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials
    if args.workers is not None:
        data["workers"] = args.workers
    if args.out is not None:
        data["out"] = args.out
    return bench.ExperimentConfig.from_dict(data)


def cmd_bench(args) -> int:
    config = _override(bench.ExperimentConfig.load(args.config), args)
    row = bench.run_benchmark(config)
    if config.out:
        bench.write_outputs(config, [row], config.out)
    sys.stdout.write(bench.summary_csv([row]))
    return 0


def _table_rows(which: int, ns, trials: int, seed: int, allow_large: bool, workers: int):
    """``(table, target, n, row, measured, published)`` records for one table."""
    out = []
    if which in (1, 2, 3):
        target = {1: "haar", 2: "ghz", 3: "w"}[which]
        methods = ["gdfe", "oasis_gt"] + ([] if target == "haar" else ["cdfe", "oasis_st"])
        for n in ns:
            for est in methods:
                published = bench.PUBLISHED_MSE[(target, est)].get(n)
                if est == "cdfe":
                    out.append((which, target, n, "cdfe (external, not reproduced)", "", published))
                    continue
                if est == "oasis_gt" and n > oasis_gt.MAX_ENUM_QUBITS and not allow_large:
                    out.append((which, target, n, est, "skipped (needs --allow-large)", published))
                    continue
                budget = (
                    {"shots": int(round(bench.reference_shots(target, n)))}
                    if est == "oasis_gt"
                    else {"epsilon": 0.1, "delta": 0.1}
                )
                config = bench.ExperimentConfig(
                    target=target, n=n, estimator=est, trials=trials, base_seed=seed,
                    allow_large=allow_large, workers=workers, **budget,
                )
                row = bench.run_benchmark(config)
                out.append((which, target, n, est, repr(row.corrected_mse * 1e4), published))
    elif which == 4:
        for target in ("haar", "ghz", "w"):
            for n in ns:
                budget = grouping.EstimationBudget(0.1, 0.1)
                if target == "haar":
                    shots = []
                    for i in range(trials):
                        O = states.make_haar(n, make_rng(seed, i))
                        shots.append(grouping.gdfe_exact_moments(O, grouping.group_target(O), budget)[2])
                    value = float(np.mean(shots))
                else:
                    O = bench.make_target(target, n)
                    value = grouping.gdfe_exact_moments(O, grouping.group_target(O), budget)[2]
                out.append((4, target, n, "gdfe_shots", repr(value), bench.REFERENCE_SHOTS[target].get(n)))
    elif which == 5:
        for target in ("ghz", "w"):
            for method in ("si", "analytic"):
                for n in ns:
                    count = bench.group_report(target, n, method).num_groups
                    out.append((5, target, n, method, str(count), bench.PUBLISHED_GROUPS[(target, method)].get(n)))
    else:
        raise bench.ConfigError("--which must be 1..5")
    return out


def cmd_tables(args) -> int:
    ns = args.n or ([3, 4] if args.which == 1 else [3, 4, 5, 6])
    rows = _table_rows(args.which, ns, args.trials, args.seed, args.allow_large, args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "target", "n", "row", "measured", "published"])
    w.writerows(["" if x is None else x for x in r] for r in rows)
    sys.stdout.write(buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oasis-dfe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("groups", help="group counts and listings for ghz and w")
    p.add_argument("--target", choices=["ghz", "w"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=["si", "analytic"], default="analytic")
    p.add_argument("--out")
    p.set_defaults(func=cmd_groups)

    p = sub.add_parser("optimize", help="solve the weight LP and write a weights file")
    p.add_argument("--target", required=True, help="ghz, w or haar-seed:S")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["cone", "explicit"], default="cone")
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("estimate", help="run the weighted estimator on a noisy target")
    p.add_argument("--weights", required=True)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--target", default="ghz", help="target the weights were solved for")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--state", help="density-matrix file; replaces the depolarized target")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", help="run a benchmark from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tables", help="regenerate a results table as CSV")
    p.add_argument("--which", type=int, choices=[1, 2, 3, 4, 5], required=True)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (bench.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (lp.LpError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
