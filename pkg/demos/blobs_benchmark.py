"""
A small real benchmark
======================

Runs naive, quasi-naive and random search on the bundled two-blob dataset
with the bundled catalog, then prints the final test errors and the gap of
each optimizer to the best one on every seed.
"""

import tempfile
from collections import defaultdict

from naiveml import Budget, KFold, Metric, ValidationSpec
from naiveml.analysis import per_run_test_gaps, quantile_summary
from naiveml.datasets import load_blobs, load_default_catalog
from naiveml.harness import BenchmarkConfig, run_benchmark

out = tempfile.mkdtemp(prefix="naiveml-demo-")
config = BenchmarkConfig(
    datasets={"blobs": load_blobs()},
    optimizers=["naive", "quasi-naive", "random"],
    seeds=[0, 1, 2],
    budget=Budget(evaluations=40),
    validation=ValidationSpec(KFold(5), 0, 60.0, Metric.ERROR_RATE),
    catalog=load_default_catalog(),
    out_dir=out,
)
records = run_benchmark(config)

scores = defaultdict(dict)
for r in records:
    print(f"{r.run_id:32s} test error {r.test_raw_score:.3f}  pipeline {[c and c['component'] for c in r.final_pipeline]}")
    scores[(r.dataset, r.seed)][r.optimizer] = r.test_score

for name, gaps in sorted(per_run_test_gaps(scores).items()):
    print(name, quantile_summary(gaps))
print("traces and records written to", out)
