"""
Anytime behaviour of the optimizers
===================================

Surfaces with tunable parameters let phase two (random parameter search on
each chosen component) matter. We compare the best-so-far curves of naive,
quasi-naive and joint random search, counting evaluations instead of seconds.
"""

import numpy as np

from naiveml import Budget, naive_automl, quasi_naive_automl, random_search
from naiveml.analysis import rank_over_time
from naiveml.surrogate import evaluator, make_surface

factories = {"naive": naive_automl, "quasi-naive": quasi_naive_automl, "random": random_search}
traces = {}
for d in range(12):
    surface = make_surface([4, 3, 6], interaction_scale=0.2, amplitude_range=(0.5, 2.0),
                           seed=d, params_per_candidate=2)
    traces[f"surface{d}"] = {}
    for name, factory in factories.items():
        opt = factory(surface.catalog(), evaluator(surface), Budget(evaluations=300), seed=d)
        # use the evaluation index as the clock so runs are comparable
        traces[f"surface{d}"][name] = [(i, e.global_score) for i, e in enumerate(opt.run(), 1)]

###############################################################################
# Median rank across surfaces (1 is best) at a few points of the stream.

grid = [5, 13, 25, 50, 100, 300]
ranks = rank_over_time(traces, grid)
print("event index " + "".join(f"{g:>7}" for g in grid))
for name in ranks["optimizers"]:
    print(f"{name:>11} " + "".join(f"{r:7.2f}" for r in ranks["median"][name]))
