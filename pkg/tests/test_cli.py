import csv
import io
import json

import pytest

from naiveml.cli import main, parse_seeds
from naiveml.datasets import blobs_csv_path, catalog_path
from naiveml.surrogate import make_surface


def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("0,5") == [0, 5]
    assert parse_seeds("1..2,7") == [1, 2, 7]


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    code = main(["run", "--catalog", str(catalog_path()), "--data", str(blobs_csv_path()),
                 "--label", "label", "--optimizers", "naive,random", "--seeds", "0..1",
                 "--budget-evals", "8", "--folds", "3", "--metric", "error", "--workers", "1",
                 "--out", str(out)])
    assert code == 0
    return out


def test_run_writes_traces_and_records(run_dir):
    assert len(list(run_dir.glob("*.trace.jsonl"))) == 4
    assert len(list(run_dir.glob("*.record.json"))) == 4


@pytest.mark.parametrize("report,header", [
    ("gaps", ["t", "optimizer", "mean_gap", "median_gap", "trimmed_mean_gap", "runs_without_candidate"]),
    ("ranks", ["t", "optimizer", "median_rank", "q25_rank", "q75_rank"]),
    ("wins", ["t", "a", "b", "wins_a", "wins_b", "ties"]),
    ("final", ["optimizer", "dataset_index", "gap"]),
])
def test_analyze_reports(run_dir, capsys, report, header):
    assert main(["analyze", "--in", str(run_dir), "--report", report, "--points", "20"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == header
    assert len(rows) > 1


def test_oracle_on_failure_fixture(tmp_path, capsys, failure_surface, failure_catalog):
    from naiveml.core import save_catalog
    save_catalog(failure_catalog, tmp_path / "cat.json")
    failure_surface.save(tmp_path / "surface.json")
    assert main(["oracle", "--catalog", str(tmp_path / "cat.json"),
                 "--surface", str(tmp_path / "surface.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["best_score"] == pytest.approx(0.9)
    assert [c["component"] for c in doc["best_pipeline"]] == ["t1", "p1"]
    flagged = {r["slot"] for r in doc["naivety"] if r["violated"]}
    # the best pre-processor also flips with the predictor, so both slots are flagged
    assert flagged == {"data_preprocessor", "predictor"}


def test_oracle_on_random_surface(tmp_path, capsys):
    surface = make_surface([2, 3], seed=1)
    from naiveml.core import save_catalog
    save_catalog(surface.catalog(), tmp_path / "cat.json")
    surface.save(tmp_path / "s.json")
    assert main(["oracle", "--catalog", str(tmp_path / "cat.json"), "--surface", str(tmp_path / "s.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["evaluations"] == 3 * 3
    assert not any(r["violated"] for r in doc["naivety"])


def test_invalid_catalog_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"slots": [], "standard_predictor": "x"}))
    code = main(["run", "--catalog", str(bad), "--data", str(blobs_csv_path()), "--label", "label",
                 "--budget-evals", "2", "--out", str(tmp_path / "o")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_unknown_optimizer_exit_code(tmp_path):
    code = main(["run", "--catalog", str(catalog_path()), "--data", str(blobs_csv_path()), "--label", "label",
                 "--optimizers", "magic", "--budget-evals", "2", "--out", str(tmp_path / "o")])
    assert code == 1


def test_missing_data_file_exit_code(tmp_path):
    code = main(["run", "--catalog", str(catalog_path()), "--data", str(tmp_path / "nope.csv"),
                 "--label", "label", "--budget-evals", "2", "--out", str(tmp_path / "o")])
    assert code == 2


def test_analyze_empty_directory(tmp_path):
    assert main(["analyze", "--in", str(tmp_path), "--report", "gaps"]) == 1
