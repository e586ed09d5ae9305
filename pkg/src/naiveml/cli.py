"""Command line entry point: ``run``, ``analyze`` and ``oracle``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import analysis
from .core import CatalogFormatError, load_catalog, validate_catalog
from .evaluation import KFold, Metric, ValidationSpec
from .harness import BenchmarkConfig, load_csv, load_records, run_benchmark, trace_points
from .optimizers import Budget, brute_force, naivety_violation
from .surrogate import SurrogateSurface, evaluator

EXIT_CONFIG = 1
EXIT_IO = 2


class ConfigError(Exception):
    pass


def parse_seeds(text: str) -> list:
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError(f"no seeds in {text!r}")
    return seeds


def _catalog(path):
    catalog = load_catalog(path)
    problems = validate_catalog(catalog)
    if problems:
        raise ConfigError("invalid catalog:\n  " + "\n  ".join(problems))
    return catalog


def cmd_run(args) -> int:
    try:
        seeds = parse_seeds(args.seeds)
        metric = Metric.parse(args.metric)
        budget = Budget(args.budget_seconds, args.budget_evals)
        spec = ValidationSpec(KFold(args.folds), 0, args.eval_deadline_seconds, metric)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    catalog = _catalog(args.catalog)
    datasets = {}
    for path in args.data:
        datasets[Path(path).stem] = load_csv(path, args.label)
    config = BenchmarkConfig(datasets, [o.strip() for o in args.optimizers.split(",") if o.strip()],
                             seeds, budget, spec, catalog, args.out, args.train_fraction,
                             workers=args.workers)
    problems = config.problems()
    if problems:
        raise ConfigError("; ".join(problems))
    records = run_benchmark(config)
    for r in records:
        status = r.error or f"test {metric.value} {r.test_raw_score:.4f}"
        print(f"{r.run_id}: {len(r.events)} events, {r.evaluations} evaluations, {status}")
    return 0


def _grouped_traces(records):
    """dataset -> optimizer -> list of per-seed traces."""
    out = defaultdict(lambda: defaultdict(list))
    for r in records:
        out[r.dataset][r.optimizer].append(trace_points(r.events))
    return out


def _median_trace(traces, grid):
    """Step trace of the per-seed median best-so-far (seeds without an incumbent count as -inf)."""
    points = []
    for t in grid:
        values = [analysis.best_so_far(tr, t) for tr in traces]
        values = [-np.inf if v is None else v for v in values]
        m = float(np.median(values))
        if np.isfinite(m) and (not points or m > points[-1][1]):
            points.append((float(t), m))
    return points


def cmd_analyze(args) -> int:
    records = load_records(args.input)
    if not records:
        raise ConfigError(f"no run records in {args.input}")
    writer = csv.writer(sys.stdout)
    grouped = _grouped_traces(records)
    grid = analysis.time_grid([tr for d in grouped.values() for o in d.values() for tr in o], args.points)

    if args.report == "gaps":
        runs = defaultdict(dict)
        for r in records:
            runs[(r.dataset, r.seed)][r.optimizer] = trace_points(r.events)
        writer.writerow(["t", "optimizer", "mean_gap", "median_gap", "trimmed_mean_gap", "runs_without_candidate"])
        for t in grid:
            per_opt = defaultdict(list)
            for traces in runs.values():
                for o, g in analysis.empirical_gap(traces, t).items():
                    per_opt[o].append(g)
            for o in sorted(per_opt):
                finite = [g for g in per_opt[o] if g is not None and np.isfinite(g)]
                missing = len(per_opt[o]) - len(finite)
                s = analysis.gap_summary(finite)
                writer.writerow([t, o, s["mean"], s["median"], s["trimmed_mean"], missing])
    elif args.report == "ranks":
        medians = {d: {o: _median_trace(trs, grid) for o, trs in opts.items()} for d, opts in grouped.items()}
        ranks = analysis.rank_over_time(medians, grid)
        writer.writerow(["t", "optimizer", "median_rank", "q25_rank", "q75_rank"])
        for g, t in enumerate(grid):
            for o in ranks["optimizers"]:
                writer.writerow([t, o, ranks["median"][o][g], ranks["q25"][o][g], ranks["q75"][o][g]])
    elif args.report == "wins":
        medians = {d: {o: _median_trace(trs, grid) for o, trs in opts.items()} for d, opts in grouped.items()}
        names = sorted({o for d in medians.values() for o in d})
        writer.writerow(["t", "a", "b", "wins_a", "wins_b", "ties"])
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                shared = [d for d in medians if a in medians[d] and b in medians[d]]
                counts = analysis.win_counts({d: medians[d][a] for d in shared},
                                             {d: medians[d][b] for d in shared}, grid)
                for g, t in enumerate(grid):
                    writer.writerow([t, a, b, *counts[g]])
    elif args.report == "final":
        scores = defaultdict(lambda: defaultdict(list))
        for r in records:
            if r.test_score is not None:
                scores[r.dataset][r.optimizer].append(r.test_score)
        result = analysis.final_gap_distribution(scores)
        writer.writerow(["optimizer", "dataset_index", "gap"])
        for o in sorted(result):
            for i, g in enumerate(result[o]["gaps"]):
                writer.writerow([o, i, g])
        writer.writerow([])
        writer.writerow(["optimizer", "median", "q90", "max"])
        for o in sorted(result):
            writer.writerow([o, result[o]["median"], result[o]["q90"], result[o]["max"]])
    return 0


def cmd_oracle(args) -> int:
    catalog = _catalog(args.catalog)
    surface = SurrogateSurface.load(args.surface)
    evaluate_fn = evaluator(surface)
    try:
        best, score, count = brute_force(catalog, evaluate_fn, args.cap)
        reports = naivety_violation(catalog, evaluate_fn, args.cap)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    doc = {
        "best_pipeline": best.to_json(),
        "best_score": score,
        "evaluations": count,
        "naivety": [{"slot": catalog.slot_name(r.slot), "violated": r.violated,
                     "witnesses": [{"context": list(ctx), "best": b} for ctx, b in r.witnesses]}
                    for r in reports],
    }
    json.dump(doc, sys.stdout, indent=2)
    print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="naiveml")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run optimizers on CSV datasets")
    run.add_argument("--catalog", required=True)
    run.add_argument("--data", required=True, nargs="+")
    run.add_argument("--label", required=True)
    run.add_argument("--optimizers", default="naive,quasi-naive,random")
    run.add_argument("--seeds", default="0")
    run.add_argument("--budget-seconds", type=float, default=None)
    run.add_argument("--budget-evals", type=int, default=None)
    run.add_argument("--eval-deadline-seconds", type=float, default=300.0)
    run.add_argument("--metric", default="auroc", choices=["auroc", "logloss", "error"])
    run.add_argument("--folds", type=int, default=5)
    run.add_argument("--train-fraction", type=float, default=0.9)
    run.add_argument("--workers", type=int, default=None,
                     help="parallel runs (default: $NAIVEML_WORKERS or 1)")
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    an = sub.add_parser("analyze", help="turn run records into plot-ready CSV")
    an.add_argument("--in", dest="input", required=True)
    an.add_argument("--report", required=True, choices=["gaps", "ranks", "wins", "final"])
    an.add_argument("--format", default="csv", choices=["csv"])
    an.add_argument("--points", type=int, default=200)
    an.set_defaults(func=cmd_analyze)

    oracle = sub.add_parser("oracle", help="brute force and naivety check on a surrogate surface")
    oracle.add_argument("--catalog", required=True)
    oracle.add_argument("--surface", required=True)
    oracle.add_argument("--cap", type=int, default=10_000)
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CatalogFormatError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
