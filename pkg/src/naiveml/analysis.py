"""Anytime analyses over optimizer traces: gaps, ranks, duels and final gaps.

A trace is a sequence of ``(elapsed, score)`` pairs (or objects with
``elapsed`` and ``global_score`` attributes) ordered by time, with scores on
the higher-is-better scale.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np
from scipy.stats import rankdata


def _points(events):
    out = []
    for e in events:
        if hasattr(e, "global_score"):
            out.append((float(e.elapsed), float(e.global_score)))
        else:
            out.append((float(e[0]), float(e[1])))
    return out


def best_so_far(events, t: float):
    """Best score among events at or before ``t``; ``None`` if there is none yet."""
    best = None
    for elapsed, score in _points(events):
        if elapsed > t:
            break
        best = score if best is None else max(best, score)
    return best


def empirical_gap(traces: dict, t: float) -> dict:
    """Gap of each optimizer to the best score any optimizer reached by ``t``.

    Optimizers without an event yet get ``inf``; when nobody has an event every
    gap is ``None``.
    """
    bests = {name: best_so_far(ev, t) for name, ev in traces.items()}
    seen = [b for b in bests.values() if b is not None]
    if not seen:
        return {name: None for name in traces}
    reference = max(seen)
    return {name: (math.inf if b is None else reference - b) for name, b in bests.items()}


def trimmed_mean(values, proportion: float = 0.1) -> float:
    """Mean after dropping ceil(proportion * n) of the largest and of the smallest values."""
    values = np.sort(np.asarray(values, dtype=float))
    cut = math.ceil(proportion * len(values))
    kept = values[cut:len(values) - cut]
    if len(kept) == 0:
        return float(np.median(values))
    return float(kept.mean())


def gap_summary(gaps, proportion: float = 0.1) -> dict:
    gaps = [g for g in gaps if g is not None]
    if not gaps:
        return {"mean": None, "median": None, "trimmed_mean": None}
    return {"mean": float(np.mean(gaps)), "median": float(np.median(gaps)),
            "trimmed_mean": trimmed_mean(gaps, proportion)}


def time_grid(traces, points: int = 200) -> np.ndarray:
    """Log-spaced times between the earliest and latest event over all traces."""
    times = [t for ev in traces for t, _ in _points(ev)]
    if not times:
        return np.array([])
    positive = [t for t in times if t > 0]
    lo = min(positive) if positive else 1e-3
    hi = max(max(times), lo)
    if hi == lo:
        return np.array([lo])
    return np.geomspace(lo, hi, points)


def _scores_at(traces: dict, names, t):
    return np.array([-math.inf if (b := best_so_far(traces[n], t)) is None else b for n in names])


def rank_over_time(traces_by_dataset: dict, grid) -> dict:
    """Average-tie ranks (1 = best) of each optimizer at every grid point.

    ``traces_by_dataset`` maps dataset -> optimizer -> trace. Returns the
    per-dataset rank arrays (grid x optimizers) and, per optimizer, the
    median and interquartile range across datasets.
    """
    names = sorted({n for traces in traces_by_dataset.values() for n in traces})
    if len(names) < 2:
        raise ValueError("ranking needs at least two optimizers")
    grid = np.asarray(grid, dtype=float)
    per_dataset = {}
    for dataset, traces in traces_by_dataset.items():
        ranks = np.empty((len(grid), len(names)))
        for g, t in enumerate(grid):
            ranks[g] = rankdata(-_scores_at(traces, names, t), method="average")
        per_dataset[dataset] = ranks
    stack = np.stack(list(per_dataset.values()))  # datasets x grid x optimizers
    q25, median, q75 = np.quantile(stack, [0.25, 0.5, 0.75], axis=0)
    return {
        "optimizers": names,
        "grid": grid,
        "per_dataset": per_dataset,
        "median": {n: median[:, i] for i, n in enumerate(names)},
        "q25": {n: q25[:, i] for i, n in enumerate(names)},
        "q75": {n: q75[:, i] for i, n in enumerate(names)},
    }


def win_counts(traces_a: dict, traces_b: dict, grid) -> np.ndarray:
    """Per grid point, datasets where A is ahead, B is ahead, or they tie.

    Both arguments map dataset -> trace. A missing incumbent counts as -inf.
    """
    datasets = sorted(traces_a)
    if sorted(traces_b) != datasets:
        raise ValueError("both optimizers need a trace for every dataset")
    out = np.zeros((len(grid), 3), dtype=int)
    for g, t in enumerate(grid):
        for d in datasets:
            a = best_so_far(traces_a[d], t)
            b = best_so_far(traces_b[d], t)
            a = -math.inf if a is None else a
            b = -math.inf if b is None else b
            out[g, 0 if a > b else 1 if b > a else 2] += 1
    return out


def quantile_summary(values) -> dict:
    values = np.asarray(values, dtype=float)
    return {"median": float(np.quantile(values, 0.5)),
            "q90": float(np.quantile(values, 0.9)),
            "max": float(values.max())}


def final_gap_distribution(records_by_dataset: dict) -> dict:
    """Per-dataset gap between the best median final score and each optimizer's median.

    ``records_by_dataset`` maps dataset -> optimizer -> list of oriented final
    scores (one per seed). Returns, per optimizer, its gaps (in dataset order)
    and their median / 90% quantile / maximum.
    """
    gaps = defaultdict(list)
    for dataset in records_by_dataset:
        medians = {o: float(np.median(s)) for o, s in records_by_dataset[dataset].items() if len(s)}
        best = max(medians.values())
        for o, m in medians.items():
            gaps[o].append(best - m)
    return {o: {"gaps": g, **quantile_summary(g)} for o, g in gaps.items()}


def per_run_test_gaps(scores: dict) -> dict:
    """Per-run gaps on final test scores.

    ``scores`` maps ``(dataset, seed)`` -> optimizer -> oriented test score;
    each run's gap is the best score of its (dataset, seed) group minus its own.
    """
    out = defaultdict(list)
    for group in scores.values():
        valid = {o: s for o, s in group.items() if s is not None}
        if not valid:
            continue
        best = max(valid.values())
        for o, s in valid.items():
            out[o].append(best - s)
    return dict(out)
