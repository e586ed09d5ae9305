"""
Cost of slot interaction
========================

Random surrogate surfaces with growing interaction strength. With no
interaction naive search finds the exhaustive optimum every time; the regret
grows as slots start to depend on each other.
"""

import numpy as np

from naiveml import Budget, brute_force, naive_automl, quasi_naive_automl
from naiveml.surrogate import evaluator, make_surface

scales = [0.0, 0.1, 0.25, 0.5, 1.0]
trials = 40

print(f"{'scale':>6} {'naive hits':>11} {'quasi hits':>11} {'naive regret':>13} {'quasi regret':>13}")
for scale in scales:
    hits = np.zeros(2)
    regret = np.zeros(2)
    for seed in range(trials):
        surface = make_surface([3, 3, 4], interaction_scale=scale, seed=seed)
        catalog, fn = surface.catalog(), evaluator(surface)
        _, best, _ = brute_force(catalog, fn)
        for k, factory in enumerate((naive_automl, quasi_naive_automl)):
            opt = factory(catalog, fn, Budget(evaluations=1000), seed=seed)
            opt.run()
            value = surface.value(opt.final_pipeline)
            hits[k] += np.isclose(value, best)
            regret[k] += best - value
    print(f"{scale:6.2f} {hits[0]:11.0f} {hits[1]:11.0f} {regret[0] / trials:13.4f} {regret[1] / trials:13.4f}")
