"""Command-line surface: single runs, batches, tuning, traces, and the
bundled reproduction of the benchmark tables.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 non-convergence or an
infeasible tuning grid. Every command honours --seed; identical invocations
produce byte-identical output files.
"""

import argparse
import csv
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .automata import AutomatonConfig
from .env import PRESETS, benchmark_environment, load_environment_file
from .experiment import (BEST_PARAMS, DCA_MATCHED_PARAMS, run_batch,
                         run_until_convergence, trace_run)
from .tuning import TuningSpec, grid_search

REPORT_HEADER = ["scheme", "env", "n", "gamma", "accuracy", "mean_iterations",
                 "std_iterations", "replications", "non_converged"]
TRACE_HEADER = ["t", "p_tracked", "selected", "feedback", "leader"]
GRID_HEADER = ["n", "gamma", "passed_ne", "mean_iterations", "accuracy"]


@dataclass(frozen=True)
class ReportRow:
    scheme: str
    env: str
    n: int
    gamma: float
    accuracy: float
    mean_iterations: float
    std_iterations: float
    replications: int
    non_converged: int


class _UsageError(Exception):
    pass


class _FileError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def write_report_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for row in rows:
        writer.writerow([row.scheme, row.env, row.n, row.gamma, row.accuracy,
                         row.mean_iterations, row.std_iterations,
                         row.replications, row.non_converged])


def read_report_csv(fh) -> list[ReportRow]:
    reader = csv.reader(fh)
    header = next(reader)
    if header != REPORT_HEADER:
        raise ValueError(f"unexpected report header: {header}")
    return [ReportRow(r[0], r[1], int(r[2]), float(r[3]), float(r[4]),
                      float(r[5]), float(r[6]), int(r[7]), int(r[8]))
            for r in reader]


def write_trace_csv(trace, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for i in range(trace.steps.shape[0]):
        writer.writerow([trace.steps[i], float(trace.tracked_probability[i]),
                         trace.selected[i], trace.feedback[i], trace.leader[i]])


def write_grid_csv(cells, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(GRID_HEADER)
    for c in cells:
        writer.writerow([c.n, c.gamma, c.passed_ne,
                         "" if c.mean_iterations is None else c.mean_iterations,
                         "" if c.accuracy is None else c.accuracy])


def _resolve_env(spec: str):
    if spec.endswith(".env.csv"):
        try:
            return load_environment_file(spec)
        except ValueError as exc:
            raise _FileError(f"{spec}: {exc}") from None
    return benchmark_environment(spec)


def _env_sort_key(name: str):
    order = sorted(PRESETS)
    return (order.index(name), "") if name in order else (len(order), name)


def _config(args, env, scheme=None) -> AutomatonConfig:
    return AutomatonConfig(r=env.r, n=args.n, gamma=args.gamma, mu=args.mu,
                           k0=args.k0, scheme=scheme or args.scheme)


def _default_parallelism() -> int:
    raw = os.environ.get("LABENCH_PARALLELISM", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(path, write_fn) -> None:
    fh, close = _open_out(path)
    try:
        write_fn(fh)
    finally:
        if close:
            fh.close()


def cmd_run(args) -> int:
    env = _resolve_env(args.env)
    config = _config(args, env)
    result = run_until_convergence(config, env, args.T, args.max_iter, args.seed)
    print(f"scheme={config.scheme} env={args.env} n={config.n} "
          f"gamma={config.gamma} seed={args.seed}")
    print(f"converged_action={result.converged_action} "
          f"iterations={result.iterations} correct={result.correct}")
    return 0 if result.converged_action is not None else 3


def cmd_batch(args) -> int:
    schemes = sorted(set(args.scheme))
    env_names = sorted(set(args.env), key=_env_sort_key)
    rows = []
    for scheme in schemes:
        for name in env_names:
            env = _resolve_env(name)
            config = _config(args, env, scheme=scheme)
            summary = run_batch(config, env, args.reps, args.T, args.max_iter,
                                base_seed=args.seed, parallelism=args.parallelism)
            rows.append(ReportRow(scheme, name, config.n, float(config.gamma),
                                  summary.accuracy, summary.mean_iterations,
                                  summary.std_iterations, summary.replications,
                                  summary.non_converged))
    _emit(args.out, lambda fh: write_report_csv(rows, fh))
    return 0


def cmd_tune(args) -> int:
    env = _resolve_env(args.env)
    spec = TuningSpec(
        n_grid=tuple(range(args.n_min, args.n_max + 1, args.n_step)),
        gamma_grid=tuple(range(args.gamma_min, args.gamma_max + 1, args.gamma_step)),
        ne=args.ne, threshold=args.T, eval_replications=args.eval_reps,
        max_iter=args.max_iter)
    result = grid_search(args.scheme, env, spec, base_seed=args.seed,
                         parallelism=args.parallelism)
    _emit(args.out, lambda fh: write_grid_csv(result.cells, fh))
    if not result.feasible:
        print("no feasible parameters", file=sys.stderr)
        return 3
    print(f"best n={result.best_n} gamma={result.best_gamma} "
          f"mean_iterations={result.mean_iterations:.1f}")
    return 0


def cmd_trace(args) -> int:
    env = _resolve_env(args.env)
    config = _config(args, env)
    trace = trace_run(config, env, args.T, args.max_iter, args.seed,
                      tracked_action=args.track)
    _emit(args.out, lambda fh: write_trace_csv(trace, fh))
    return 0 if trace.converged_action is not None else 3


def cmd_repro(args) -> int:
    if args.reps >= 250_000:
        print(f"warning: {args.reps} replications per cell; expect a long runtime",
              file=sys.stderr)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    env_names = sorted(BEST_PARAMS["dca"])
    common = dict(threshold=args.T, max_iter=args.max_iter,
                  parallelism=args.parallelism)

    rows = []
    best = {}
    for scheme in ("dca", "seri"):
        for name in env_names:
            env = benchmark_environment(name)
            n, gamma = BEST_PARAMS[scheme][name]
            config = AutomatonConfig(r=env.r, n=n, gamma=gamma, scheme=scheme)
            summary = run_batch(config, env, args.reps, base_seed=args.seed, **common)
            best[(scheme, name)] = summary
            rows.append(ReportRow(scheme, name, n, float(gamma), summary.accuracy,
                                  summary.mean_iterations, summary.std_iterations,
                                  summary.replications, summary.non_converged))
    with open(out_dir / "best_params_results.csv", "w", encoding="utf-8", newline="") as fh:
        write_report_csv(rows, fh)

    with open(out_dir / "speed_comparison.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["env", "dca_n", "dca_gamma", "dca_mean_iterations",
                         "seri_n", "seri_gamma", "seri_mean_iterations",
                         "improvement_pct"])
        for name in env_names:
            env = benchmark_environment(name)
            n, gamma = DCA_MATCHED_PARAMS[name]
            config = AutomatonConfig(r=env.r, n=n, gamma=gamma, scheme="dca")
            matched = run_batch(config, env, args.reps, base_seed=args.seed, **common)
            baseline = best[("seri", name)]
            improvement = 100.0 * (baseline.mean_iterations - matched.mean_iterations) \
                / baseline.mean_iterations
            sn, sg = BEST_PARAMS["seri"][name]
            writer.writerow([name, n, float(gamma), matched.mean_iterations,
                             sn, float(sg), baseline.mean_iterations, improvement])
            print(f"{name}: dca {matched.mean_iterations:.0f} vs seri "
                  f"{baseline.mean_iterations:.0f} iterations "
                  f"({improvement:.2f}% fewer)")
    print(f"reports written to {out_dir}")
    return 0


def _add_common_run_flags(p, with_scheme=True):
    if with_scheme:
        p.add_argument("--scheme", required=True, choices=["dca", "seri"])
    p.add_argument("--env", required=True,
                   help="preset name (E1..E5) or a *.env.csv file of probabilities")
    p.add_argument("--n", required=True, type=int, help="resolution parameter")
    p.add_argument("--gamma", required=True, type=float,
                   help="stochastic estimator perturbation scale")
    p.add_argument("--mu", type=float, default=0.1, help="leader attenuation factor")
    p.add_argument("--k0", type=int, default=10, help="initialization samples per action")
    p.add_argument("--T", type=float, default=0.999, help="convergence threshold")
    p.add_argument("--max-iter", type=int, default=1_000_000, dest="max_iter")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="labench",
                     description="Learning-automata convergence benchmark toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one replication, printed")
    _add_common_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="seeded Monte Carlo batch, CSV report")
    p.add_argument("--scheme", required=True, nargs="+", choices=["dca", "seri"])
    p.add_argument("--env", required=True, nargs="+",
                   help="one or more presets or *.env.csv files")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--gamma", required=True, type=float)
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--k0", type=int, default=10)
    p.add_argument("--T", type=float, default=0.999)
    p.add_argument("--max-iter", type=int, default=1_000_000, dest="max_iter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--parallelism", type=int, default=_default_parallelism())
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("tune", help="grid search for the fastest reliable cell")
    p.add_argument("--scheme", required=True, choices=["dca", "seri"])
    p.add_argument("--env", required=True)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=150)
    p.add_argument("--n-step", type=int, default=1)
    p.add_argument("--gamma-min", type=int, default=1)
    p.add_argument("--gamma-max", type=int, default=30)
    p.add_argument("--gamma-step", type=int, default=1)
    p.add_argument("--ne", type=int, default=750,
                   help="required consecutive correct convergences")
    p.add_argument("--eval-reps", type=int, default=2000, dest="eval_reps")
    p.add_argument("--T", type=float, default=0.999)
    p.add_argument("--max-iter", type=int, default=1_000_000, dest="max_iter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallelism", type=int, default=_default_parallelism())
    p.add_argument("--out", default=None, help="grid CSV path (default: stdout)")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("trace", help="per-iteration trace of one run, CSV")
    _add_common_run_flags(p)
    p.add_argument("--track", type=int, default=None,
                   help="action whose probability to record (default: optimal)")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("repro", help="full benchmark protocol at pre-tuned parameters")
    p.add_argument("--reps", type=int, default=25_000)
    p.add_argument("--T", type=float, default=0.999)
    p.add_argument("--max-iter", type=int, default=1_000_000, dest="max_iter")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--parallelism", type=int, default=_default_parallelism())
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.set_defaults(func=cmd_repro)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _FileError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
