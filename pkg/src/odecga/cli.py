"""Command line entry point: ``odecga solve|bench|compare``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .ga import Crossover, GaConfig, Strategy, run_ga
from .instance_io import default_optima_registry, read_optima_registry, read_tsplib_atsp

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

log = logging.getLogger("odecga")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _ga_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pop", type=int, default=100, help="population size N")
    p.add_argument("--tournament", type=int, default=10, help="tournament size s")
    p.add_argument("--pmut", type=float, default=0.1, help="mutation probability")
    p.add_argument("--strategy", choices=["steady", "elitist"], default="steady")
    p.add_argument("--crossover", choices=["odec", "dec"], default="odec")
    p.add_argument("--no-restarts", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _config(args, time_limit, iterations) -> GaConfig:
    try:
        return _make_config(args, time_limit, iterations)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _make_config(args, time_limit, iterations) -> GaConfig:
    return GaConfig(
        pop_size=args.pop,
        tournament=args.tournament,
        p_mut=args.pmut,
        time_limit=time_limit,
        max_iterations=iterations,
        strategy=Strategy(args.strategy),
        crossover=Crossover(args.crossover),
        restarts=not args.no_restarts,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="odecga", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="single run, JSON report on stdout")
    solve.add_argument("instance", type=Path)
    budget = solve.add_mutually_exclusive_group()
    budget.add_argument("--time-limit", type=float)
    budget.add_argument("--iterations", type=int)
    solve.add_argument("--optimum", type=int, help="known optimum; stop when reached")
    _ga_flags(solve)

    b = sub.add_parser("bench", help="repeated runs over a directory, CSV output")
    b.add_argument("--instances", type=Path, required=True)
    b.add_argument("--optima", type=Path, help="registry file (default: bundled TSPLIB optima)")
    b.add_argument("--runs", type=int, required=True)
    b.add_argument("--time-limit", type=float, required=True)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--stop-at-optimum", action="store_true",
                   help="end a run as soon as the registry optimum is reached")
    b.add_argument("--out", type=Path, required=True)
    _ga_flags(b)

    c = sub.add_parser("compare", help="success-frequency comparison of two result files")
    c.add_argument("a", type=Path)
    c.add_argument("b", type=Path)
    c.add_argument("--alpha", type=float, default=0.05)
    return parser


def _cmd_solve(args) -> int:
    instance = read_tsplib_atsp(args.instance)
    time_limit = args.time_limit
    if time_limit is None and args.iterations is None:
        time_limit = 1.0
    config = _config(args, time_limit, args.iterations)
    rec = run_ga(instance, config, args.optimum)
    report = {
        "instance": instance.name,
        "n": instance.n,
        "best_length": rec.best_length,
        "optimum": args.optimum,
        "gap": None if args.optimum is None else 100 * (rec.best_length - args.optimum) / args.optimum,
        "init_best_length": rec.init_best_length,
        "time_to_best": rec.time_to_best,
        "iterations": rec.iterations,
        "restarts": rec.restarts,
        "proven_optimal_at_init": rec.proven_optimal_at_init,
        "tour": [v + 1 for v in rec.best.order.tolist()],
    }
    json.dump(report, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.runs < 1:
        raise _UsageError("--runs must be at least 1")
    registry = read_optima_registry(args.optima) if args.optima else default_optima_registry()
    files = sorted(p for p in args.instances.iterdir() if p.name.endswith((".atsp", ".atsp.txt")))
    if not files:
        raise FileNotFoundError(f"no .atsp files in {args.instances}")
    config = _config(args, args.time_limit, None)
    rows = []
    for path in files:
        instance = read_tsplib_atsp(path)
        optimum = bench.resolve_optimum(instance, registry)
        if optimum is None:
            continue
        hint = optimum if args.stop_at_optimum else None
        records = bench.run_trials(instance, config, args.runs, args.seed, args.workers, hint)
        rows.extend(bench.records_to_rows(instance.name, config, records, optimum))
        m = bench.metrics_from_records(records, optimum, instance.name)
        print(
            f"{instance.name:<10} runs={m.runs:<5d} F_opt={float(m.f_opt):.3f} "
            f"d_err={float(m.delta_err):.4f}% d_init={float(m.delta_init):.4f}%",
            file=sys.stderr,
        )
    bench.write_results_csv(rows, args.out)
    return EXIT_OK


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.4f}"


def _cmd_compare(args) -> int:
    if not 0 < args.alpha < 1:
        raise _UsageError("--alpha must lie in (0, 1)")
    a = bench.read_results_csv(args.a)
    b = bench.read_results_csv(args.b)
    rows = bench.compare_results(a, b, args.alpha)
    print(f"{'instance':<12}{'F_opt(A)':>10}{'F_opt(B)':>10}{'d_err(A)':>10}{'d_err(B)':>10}{'A':>9}  sig")
    for r in rows:
        print(
            f"{r.instance:<12}{r.f_a:>10.3f}{r.f_b:>10.3f}{_fmt(r.delta_err_a):>10}"
            f"{_fmt(r.delta_err_b):>10}{r.test.a:>9.2f}  {'*' if r.test.significant else ''}"
        )
    if rows:
        k = len(rows)
        errs_a = [r.delta_err_a for r in rows if r.delta_err_a is not None]
        errs_b = [r.delta_err_b for r in rows if r.delta_err_b is not None]
        mean = lambda xs: sum(xs) / len(xs) if xs else None  # noqa: E731
        print(
            f"{'Average':<12}{sum(r.f_a for r in rows) / k:>10.3f}{sum(r.f_b for r in rows) / k:>10.3f}"
            f"{_fmt(mean(errs_a)):>10}{_fmt(mean(errs_b)):>10}"
            f"{sum(r.test.a for r in rows) / k:>9.2f}"
        )
        wins = sum(r.f_a > r.f_b for r in rows)
        sig = sum(r.f_a > r.f_b and r.test.significant for r in rows)
        print(f"A more frequent on {wins}/{k} instances ({sig} significant at alpha={args.alpha})")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"solve": _cmd_solve, "bench": _cmd_bench, "compare": _cmd_compare}[args.command]
    try:
        return handler(args)
    except _UsageError as exc:
        print(f"odecga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError) as exc:
        print(f"odecga: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
