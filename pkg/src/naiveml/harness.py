"""Dataset ingestion, benchmark orchestration and trace persistence."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .components import ComponentIncompatibility, DegenerateData, fit_pipeline
from .core import BLANK_ID, Catalog, Dataset, Pipeline, encode_and_impute, validate_catalog
from .evaluation import ValidationSpec, evaluate, stratified_split
from .optimizers import OPTIMIZERS, Budget, TraceEvent, repair
from .surrogate import SurrogateSurface, surrogate_eval

logger = logging.getLogger(__name__)

TRACE_SCHEMA = {
    "type": "object",
    "required": ["run_id", "elapsed_ms", "slot", "component_id", "params",
                 "local_score", "global_score", "status"],
    "properties": {
        "run_id": {"type": "string"},
        "elapsed_ms": {"type": "number", "minimum": 0},
        "slot": {"type": ["string", "null"]},
        "component_id": {"type": "string"},
        "params": {"type": ["object", "null"]},
        "local_score": {"type": "number"},
        "global_score": {"type": "number"},
        "status": {"enum": ["ok", "timeout", "failed"]},
        "raw_score": {"type": ["number", "null"]},
    },
}


def load_csv(path, label_column: str) -> Dataset:
    """Read a comma-separated file with a header row; empty cells and ``?`` are missing."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ValueError(f"{path}: rows do not all have {len(header)} fields")
    columns = {}
    for j, name in enumerate(header):
        cells = [r[j].strip() for r in body]
        if name == label_column:
            columns[name] = cells
            continue
        parsed = []
        numeric = True
        for cell in cells:
            if cell in ("", "?"):
                parsed.append(None)
                continue
            try:
                parsed.append(float(cell))
            except ValueError:
                numeric = False
                break
        columns[name] = parsed if numeric else [None if c in ("", "?") else c for c in cells]
    return encode_and_impute(columns, label_column)


def outer_split_indices(dataset: Dataset, train_fraction: float, seed: int):
    return stratified_split(dataset.labels, train_fraction, np.random.default_rng(seed))


def outer_split(dataset: Dataset, train_fraction: float, seed: int):
    train_idx, test_idx = outer_split_indices(dataset, train_fraction, seed)
    return dataset.subset(train_idx), dataset.subset(test_idx)


# --------------------------------------------------------------------------
# traces


def trace_line(run_id: str, event: TraceEvent, catalog: Catalog) -> dict:
    return {
        "run_id": run_id,
        "elapsed_ms": round(event.elapsed * 1000.0, 3),
        "slot": None if event.slot is None else catalog.slot_name(event.slot),
        "component_id": BLANK_ID if event.component is None else event.component,
        "params": event.params,
        "local_score": event.local_score,
        "global_score": event.global_score,
        "status": event.status,
        "raw_score": event.raw_score,
    }


def read_trace(path) -> list:
    """Parse and schema-check a trace file, one JSON object per line."""
    lines = []
    with open(path) as fh:
        for number, text in enumerate(fh, 1):
            if not text.strip():
                continue
            obj = json.loads(text)
            try:
                jsonschema.validate(obj, TRACE_SCHEMA)
            except jsonschema.ValidationError as exc:
                raise ValueError(f"{path}:{number}: {exc.message}") from None
            lines.append(obj)
    return lines


def trace_points(lines) -> list:
    """``(elapsed seconds, global score)`` pairs for the analysis functions."""
    return [(line["elapsed_ms"] / 1000.0, line["global_score"]) for line in lines]


# --------------------------------------------------------------------------
# benchmark runs


@dataclass
class RunRecord:
    run_id: str
    optimizer: str
    dataset: str
    seed: int
    budget: dict
    validation: dict
    train_idx: list
    test_idx: list
    events: list = field(default_factory=list)
    final_pipeline: list | None = None
    final_validation_score: float | None = None
    test_score: float | None = None  # oriented
    test_raw_score: float | None = None
    repaired: bool = False
    wall_time: float = 0.0
    evaluations: int = 0
    notes: list = field(default_factory=list)
    error: str | None = None

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=1)

    @classmethod
    def load(cls, path) -> "RunRecord":
        with open(path) as fh:
            return cls(**json.load(fh))


@dataclass
class BenchmarkConfig:
    datasets: dict  # name -> Dataset
    optimizers: list
    seeds: list
    budget: Budget
    validation: ValidationSpec
    catalog: Catalog
    out_dir: str
    train_fraction: float = 0.9
    surface: SurrogateSurface | None = None  # score pipelines on this surface instead of fitting
    workers: int | None = None

    def problems(self) -> list:
        out = [f"catalog: {p}" for p in validate_catalog(self.catalog)]
        unknown = [o for o in self.optimizers if o not in OPTIMIZERS]
        if unknown:
            out.append(f"unknown optimizer(s) {unknown}; choose from {sorted(OPTIMIZERS)}")
        for name, data in self.datasets.items():
            if not self.validation.metric.supports(data.task_kind):
                out.append(f"{name}: metric {self.validation.metric.value} does not apply to "
                           f"{data.task_kind.value} tasks")
        if not self.datasets or not self.optimizers or not self.seeds:
            out.append("need at least one dataset, optimizer and seed")
        return out


def fit_probe(train: Dataset, catalog: Catalog):
    """Probe for :func:`repair`: can ``pipeline`` be fitted on ``train``?"""
    def probe(pipeline: Pipeline) -> bool:
        try:
            fit_pipeline(pipeline, train, catalog)
        except (ComponentIncompatibility, DegenerateData):
            return False
        return True
    return probe


def _run_one(task) -> RunRecord:
    (dataset_name, data, optimizer, seed, config, train_idx, test_idx) = task
    run_id = f"{dataset_name}__{optimizer}__seed{seed}"
    out = Path(config.out_dir)
    record = RunRecord(run_id, optimizer, dataset_name, seed, asdict(config.budget),
                       _spec_dict(config.validation.with_seed(seed)),
                       [int(i) for i in train_idx], [int(i) for i in test_idx])
    train, test = data.subset(train_idx), data.subset(test_idx)
    spec = config.validation.with_seed(seed)
    catalog = config.catalog
    if config.surface is not None:
        evaluate_fn = lambda p: surrogate_eval(config.surface, p)  # noqa: E731
    else:
        evaluate_fn = lambda p: evaluate(p, train, spec, catalog)  # noqa: E731
    start = time.monotonic()
    try:
        search = OPTIMIZERS[optimizer](catalog, evaluate_fn, config.budget, seed)
        # line buffering: a killed run still leaves a readable prefix
        with open(out / f"{run_id}.trace.jsonl", "w", buffering=1) as trace:
            for event in search:
                line = trace_line(run_id, event, catalog)
                trace.write(json.dumps(line) + "\n")
                record.events.append(line)
        record.evaluations = search.evaluation_count
        record.notes = list(getattr(search, "notes", []))
        record.final_validation_score = None if math.isinf(search.final_score) else search.final_score
        final = search.final_pipeline
        if config.surface is not None:
            record.final_pipeline = final.to_json()
            record.test_score = record.test_raw_score = config.surface.value(final)
        else:
            repaired = repair(final, fit_probe(train, catalog))
            record.repaired = repaired != final
            record.final_pipeline = repaired.to_json()
            fitted = fit_pipeline(repaired, train, catalog)
            raw = spec.metric.score(test.labels, fitted.predict_proba(test.features))
            record.test_raw_score = raw
            record.test_score = spec.metric.orient(raw)
    except Exception as exc:  # noqa: BLE001  one failed run must not stop its siblings
        logger.exception("run %s failed", run_id)
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.monotonic() - start
    record.save(out / f"{run_id}.record.json")
    return record


def _spec_dict(spec: ValidationSpec) -> dict:
    return {"scheme": type(spec.scheme).__name__, **asdict(spec.scheme),
            "seed": spec.seed, "deadline": spec.deadline, "metric": spec.metric.value}


def worker_count(config: BenchmarkConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    return max(1, int(os.environ.get("NAIVEML_WORKERS", "1")))


def run_benchmark(config: BenchmarkConfig) -> list:
    """Run every (dataset, seed, optimizer) combination and persist traces and records.

    All optimizers of one (dataset, seed) pair share the same outer split, and
    their inner validation splits are seeded identically.
    """
    problems = config.problems()
    if problems:
        raise ValueError("; ".join(problems))
    Path(config.out_dir).mkdir(parents=True, exist_ok=True)
    tasks = []
    for name, data in config.datasets.items():
        for seed in config.seeds:
            train_idx, test_idx = outer_split_indices(data, config.train_fraction, seed)
            for optimizer in config.optimizers:
                tasks.append((name, data, optimizer, seed, config, train_idx, test_idx))
    workers = min(worker_count(config), len(tasks))
    if workers <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, tasks))


def load_records(directory) -> list:
    return [RunRecord.load(p) for p in sorted(Path(directory).glob("*.record.json"))]
