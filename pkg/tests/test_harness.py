import json

import numpy as np
import pytest

from naiveml import optimizers
from naiveml.core import Dataset
from naiveml.datasets import load_blobs, load_default_catalog
from naiveml.evaluation import KFold, Metric, ValidationSpec
from naiveml.harness import (
    TRACE_SCHEMA,
    BenchmarkConfig,
    RunRecord,
    load_csv,
    load_records,
    outer_split,
    outer_split_indices,
    read_trace,
    run_benchmark,
)
from naiveml.optimizers import Budget
from naiveml.surrogate import make_surface


def write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_csv_numeric(tmp_path):
    path = write(tmp_path, "a,b,c,y\n1,2,3,no\n4,5,6,yes\n7,8,9,no\n")
    data = load_csv(path, "y")
    assert data.width == 3 and data.class_count == 2
    assert list(data.labels) == [0, 1, 0]


def test_load_csv_categorical_and_missing(tmp_path):
    path = write(tmp_path, "colour,v,y\nred,1,a\ngreen,?,b\nblue,3,a\n")
    data = load_csv(path, "y")
    assert data.width == 4
    assert data.attribute_names == ("colour=blue", "colour=green", "colour=red", "v")
    assert data.features[1, 3] == 0.0
    np.testing.assert_array_equal(data.features[:, :3], [[0, 0, 1], [0, 1, 0], [1, 0, 0]])


def test_load_csv_ragged_rows(tmp_path):
    with pytest.raises(ValueError):
        load_csv(write(tmp_path, "a,y\n1,x\n2\n"), "y")


def small_dataset(n=100, classes=2, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % classes
    return Dataset(rng.normal(size=(n, 2)) + labels[:, None], labels, classes)


def test_outer_split_sizes_and_reproducibility():
    data = small_dataset()
    train, test = outer_split(data, 0.9, seed=3)
    assert (train.n, test.n) == (90, 10)
    a = outer_split_indices(data, 0.9, 3)
    b = outer_split_indices(data, 0.9, 3)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert set(a[0]).isdisjoint(a[1]) and len(set(a[0]) | set(a[1])) == 100


def test_outer_split_balanced_half():
    data = small_dataset(10)
    train, test = outer_split(data, 0.5, seed=0)
    assert (train.n, test.n) == (5, 5)


def surface_config(tmp_path, optimizers_=("naive",), seeds=(0,), evaluations=30):
    surface = make_surface([3, 2, 4], interaction_scale=0.3, amplitude_range=(0.1, 0.5),
                           seed=7, params_per_candidate=1)
    return BenchmarkConfig({"toy": small_dataset()}, list(optimizers_), list(seeds),
                           Budget(evaluations=evaluations),
                           ValidationSpec(KFold(5), 0, 300.0, Metric.AUROC),
                           surface.catalog(), str(tmp_path), surface=surface, workers=1)


def test_single_run_writes_one_record_and_trace(tmp_path):
    records = run_benchmark(surface_config(tmp_path))
    assert len(records) == 1
    assert len(list(tmp_path.glob("*.trace.jsonl"))) == 1
    assert len(list(tmp_path.glob("*.record.json"))) == 1
    loaded = load_records(tmp_path)
    assert loaded[0].run_id == records[0].run_id == "toy__naive__seed0"
    assert loaded[0].test_score == records[0].test_score


def test_optimizers_share_outer_split(tmp_path):
    records = run_benchmark(surface_config(tmp_path, ("naive", "random")))
    assert records[0].train_idx == records[1].train_idx
    assert records[0].test_idx == records[1].test_idx
    assert records[0].validation == records[1].validation


def strip_elapsed(path):
    return [{k: v for k, v in line.items() if k != "elapsed_ms"} for line in read_trace(path)]


def test_reruns_are_identical_modulo_time(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_benchmark(surface_config(out, ("naive", "quasi-naive", "random"), seeds=(0, 1)))
    names = sorted(p.name for p in a.glob("*.trace.jsonl"))
    assert len(names) == 6
    for name in names:
        assert strip_elapsed(a / name) == strip_elapsed(b / name)


def test_failed_run_is_recorded_and_siblings_finish(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("boom")
    monkeypatch.setitem(optimizers.OPTIMIZERS, "broken", broken)
    records = run_benchmark(surface_config(tmp_path, ("broken", "naive")))
    by_opt = {r.optimizer: r for r in records}
    assert "boom" in by_opt["broken"].error
    assert by_opt["naive"].error is None and by_opt["naive"].test_score is not None


def test_config_problems_reported(tmp_path):
    config = surface_config(tmp_path, ("nonexistent",))
    with pytest.raises(ValueError, match="unknown optimizer"):
        run_benchmark(config)


def test_trace_schema_rejects_bad_lines(tmp_path):
    good = {"run_id": "r", "elapsed_ms": 1.0, "slot": "predictor", "component_id": "p0",
            "params": None, "local_score": 0.5, "global_score": 0.5, "status": "ok"}
    path = tmp_path / "x.trace.jsonl"
    path.write_text(json.dumps(good) + "\n\n")
    assert read_trace(path) == [good]
    path.write_text(json.dumps({**good, "status": "weird"}) + "\n")
    with pytest.raises(ValueError, match="x.trace.jsonl:1"):
        read_trace(path)
    assert set(TRACE_SCHEMA["required"]) <= set(good)


def test_real_run_on_bundled_data(tmp_path):
    config = BenchmarkConfig({"blobs": load_blobs()}, ["naive"], [0], Budget(evaluations=12),
                             ValidationSpec(KFold(3), 0, 60.0, Metric.ERROR_RATE),
                             load_default_catalog(), str(tmp_path), workers=1)
    (record,) = run_benchmark(config)
    assert record.error is None
    assert 0.0 <= record.test_raw_score <= 1.0
    assert record.test_score == -record.test_raw_score
    assert RunRecord.load(tmp_path / f"{record.run_id}.record.json").final_pipeline == record.final_pipeline
