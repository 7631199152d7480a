"""Repeated runs, per-instance metrics and the two-proportion significance test."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from statistics import NormalDist

from .ga import GaConfig, RunRecord, run_ga
from .instance_io import AtspInstance
from .orp import held_karp

__all__ = [
    "CSV_COLUMNS",
    "MetricsRow",
    "StatTestResult",
    "ComparisonRow",
    "run_trials",
    "compute_metrics",
    "stat_test",
    "records_to_rows",
    "write_results_csv",
    "read_results_csv",
    "summarize_results",
    "compare_results",
    "resolve_optimum",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "instance",
    "run",
    "seed",
    "strategy",
    "crossover",
    "time_limit_s",
    "best_length",
    "optimum",
    "gap_percent",
    "init_best_length",
    "init_gap_percent",
    "time_to_best_s",
    "iterations",
    "restarts",
    "proven_optimal_at_init",
]


@dataclass(frozen=True)
class MetricsRow:
    instance: str
    runs: int
    f_opt: Fraction
    delta_err: Fraction  # percent
    delta_init: Fraction  # percent
    mean_time_to_best: float


@dataclass(frozen=True)
class StatTestResult:
    p1: float
    n1: int
    p2: float
    n2: int
    pooled: float
    sd: float
    a: float
    alpha: float
    critical: float
    significant: bool


def resolve_optimum(instance: AtspInstance, registry: dict[str, int], exact_up_to: int = 16) -> int | None:
    """Registry value, else the exact optimum for small instances, else None."""
    if instance.name in registry:
        return registry[instance.name]
    if instance.n <= exact_up_to:
        return held_karp(instance)[0]
    log.warning("no known optimum for %s (n=%d); skipped", instance.name, instance.n)
    return None


def _one_run(args):
    instance, config, hint = args
    return run_ga(instance, config, hint)


def run_trials(
    instance: AtspInstance,
    config: GaConfig,
    runs: int,
    base_seed: int = 0,
    workers: int = 1,
    optimum_hint: int | None = None,
) -> list[RunRecord]:
    """Run i uses seed ``base_seed + i``; records come back in run order."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    jobs = [(instance, replace(config, seed=base_seed + i), optimum_hint) for i in range(runs)]
    if workers <= 1:
        return [_one_run(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_run, jobs))


def compute_metrics(
    best_lengths, optimum: int, init_lengths=None, times=None, instance: str = ""
) -> MetricsRow:
    """Success frequency and mean percentage gaps, accumulated exactly."""
    if optimum <= 0:
        raise ValueError("optimum must be positive")
    best = [int(b) for b in best_lengths]
    if not best:
        raise ValueError("no runs to summarise")
    runs = len(best)
    init = best if init_lengths is None else [int(b) for b in init_lengths]
    f_opt = Fraction(sum(b <= optimum for b in best), runs)
    gap = sum(Fraction(100 * (b - optimum), optimum) for b in best) / runs
    gap_init = sum(Fraction(100 * (b - optimum), optimum) for b in init) / len(init)
    mean_t = sum(times) / len(times) if times else 0.0
    return MetricsRow(instance, runs, f_opt, gap, gap_init, mean_t)


def metrics_from_records(records: list[RunRecord], optimum: int, instance: str = "") -> MetricsRow:
    return compute_metrics(
        [r.best_length for r in records],
        optimum,
        [r.init_best_length for r in records],
        [r.time_to_best for r in records],
        instance,
    )


def stat_test(succ1: int, n1: int, succ2: int, n2: int, alpha: float = 0.05) -> StatTestResult:
    """Pooled two-proportion statistic |p1 - p2| / sd, two-sided at level alpha."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n1 < 1 or n2 < 1:
        raise ValueError("sample sizes must be positive")
    if not (0 <= succ1 <= n1 and 0 <= succ2 <= n2):
        raise ValueError("success counts must lie within [0, N]")
    p1, p2 = succ1 / n1, succ2 / n2
    pooled = (succ1 + succ2) / (n1 + n2)
    var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
    sd = math.sqrt(var)
    if sd == 0:
        # normal approximation undefined; unequal frequencies count as significant
        a = 0.0 if p1 == p2 else math.inf
    else:
        a = abs(p1 - p2) / sd
    critical = NormalDist().inv_cdf(1 - alpha / 2)
    return StatTestResult(p1, n1, p2, n2, pooled, sd, a, alpha, critical, a > critical)


def records_to_rows(
    instance: str, config: GaConfig, records: list[RunRecord], optimum: int | None
) -> list[dict]:
    rows = []
    for i, r in enumerate(records):
        gap = "" if optimum is None else f"{100 * (r.best_length - optimum) / optimum:.6f}"
        igap = "" if optimum is None else f"{100 * (r.init_best_length - optimum) / optimum:.6f}"
        rows.append(
            {
                "instance": instance,
                "run": i,
                "seed": r.seed,
                "strategy": config.strategy.value,
                "crossover": config.crossover.value,
                "time_limit_s": "" if config.time_limit is None else config.time_limit,
                "best_length": r.best_length,
                "optimum": "" if optimum is None else optimum,
                "gap_percent": gap,
                "init_best_length": r.init_best_length,
                "init_gap_percent": igap,
                "time_to_best_s": f"{r.time_to_best:.6f}",
                "iterations": r.iterations,
                "restarts": r.restarts,
                "proven_optimal_at_init": int(r.proven_optimal_at_init),
            }
        )
    return rows


def write_results_csv(rows: list[dict], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


@dataclass(frozen=True)
class InstanceTally:
    """Per-instance outcome read back from a results file."""

    instance: str
    successes: int
    runs: int
    delta_err: float | None = None
    delta_init: float | None = None


def read_results_csv(path: str | Path) -> dict[str, InstanceTally]:
    """Read a per-run results file or a literature baseline.

    Baselines have columns ``instance, successes, runs`` (optionally
    ``delta_err``) and carry already aggregated frequencies.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or [])
        rows = list(reader)
    if {"instance", "successes", "runs"} <= fields:
        out = {}
        for row in rows:
            name = row["instance"].strip()
            if name in out:
                raise ValueError(f"duplicate baseline row for {name}")
            derr = row.get("delta_err")
            out[name] = InstanceTally(
                name,
                int(row["successes"]),
                int(row["runs"]),
                float(derr) if derr not in (None, "") else None,
            )
            if not 0 <= out[name].successes <= out[name].runs or out[name].runs < 1:
                raise ValueError(f"bad counts for {name}")
        return out
    missing = {"instance", "best_length", "optimum", "init_best_length"} - fields
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    grouped: dict[str, list[dict]] = defaultdict(list)
    for row in rows:
        grouped[row["instance"]].append(row)
    out = {}
    for name, group in grouped.items():
        if any(r["optimum"] in ("", None) for r in group):
            raise ValueError(f"{path}: instance {name} has no optimum")
        opt = int(group[0]["optimum"])
        m = compute_metrics(
            [r["best_length"] for r in group], opt, [r["init_best_length"] for r in group]
        )
        out[name] = InstanceTally(
            name,
            sum(int(r["best_length"]) <= opt for r in group),
            len(group),
            float(m.delta_err),
            float(m.delta_init),
        )
    return out


def summarize_results(path: str | Path) -> list[MetricsRow]:
    """Table-1-style metrics for every instance of a per-run results file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    grouped: dict[str, list[dict]] = defaultdict(list)
    for row in rows:
        grouped[row["instance"]].append(row)
    return [
        compute_metrics(
            [r["best_length"] for r in g],
            int(g[0]["optimum"]),
            [r["init_best_length"] for r in g],
            [float(r["time_to_best_s"]) for r in g],
            name,
        )
        for name, g in grouped.items()
    ]


@dataclass(frozen=True)
class ComparisonRow:
    instance: str
    f_a: float
    f_b: float
    delta_err_a: float | None
    delta_err_b: float | None
    test: StatTestResult


def compare_results(
    a: dict[str, InstanceTally], b: dict[str, InstanceTally], alpha: float = 0.05
) -> list[ComparisonRow]:
    """Pair up instances present in both tallies (in A's order)."""
    out = []
    for name, ta in a.items():
        tb = b.get(name)
        if tb is None:
            log.warning("instance %s missing from second file; skipped", name)
            continue
        res = stat_test(ta.successes, ta.runs, tb.successes, tb.runs, alpha)
        out.append(ComparisonRow(name, res.p1, res.p2, ta.delta_err, tb.delta_err, res))
    return out
