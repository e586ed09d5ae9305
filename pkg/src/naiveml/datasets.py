"""Bundled demo data: a small synthetic table and the default catalog."""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from .core import Catalog, Dataset, load_catalog
from .harness import load_csv


def make_blobs_table(n: int = 200, missing_rate: float = 0.05, seed: int = 0) -> dict:
    """Two Gaussian blobs in 2-d, a categorical noise column and randomly missing cells.

    Returns a column-oriented table (missing cells are ``None``) with the class
    in column ``"label"``.
    """
    rng = np.random.default_rng(seed)
    labels = np.repeat(["a", "b"], [n // 2, n - n // 2])
    rng.shuffle(labels)
    centers = {"a": (-1.5, -1.5), "b": (1.5, 1.5)}
    X = np.array([rng.normal(centers[c], 1.0) for c in labels])
    noise = rng.choice(["red", "green", "blue"], size=n)
    table = {"x1": [round(float(v), 4) for v in X[:, 0]],
             "x2": [round(float(v), 4) for v in X[:, 1]],
             "colour": list(noise)}
    cells = [(col, i) for col in table for i in range(n)]
    for k in rng.choice(len(cells), size=int(round(missing_rate * len(cells))), replace=False):
        col, i = cells[k]
        table[col][i] = None
    table["label"] = list(labels)
    return table


def write_table_csv(table: dict, path) -> None:
    names = list(table)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in zip(*(table[c] for c in names)):
            writer.writerow(["" if v is None else v for v in row])


def blobs_csv_path():
    return resources.files("naiveml") / "data" / "blobs.csv"


def catalog_path():
    return resources.files("naiveml") / "data" / "catalog.json"


def load_blobs() -> Dataset:
    with resources.as_file(blobs_csv_path()) as path:
        return load_csv(path, "label")


def load_default_catalog() -> Catalog:
    with resources.as_file(catalog_path()) as path:
        return load_catalog(path)
