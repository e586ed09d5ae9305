"""
When slot-wise search goes wrong
================================

Four pipelines, one pre-processor ``t1`` and two predictors. The
pre-processor only helps ``p1``, so a search that picks every slot on its
own composes a pipeline nobody evaluated.
"""

from naiveml import brute_force, naive_automl, naivety_violation, quasi_naive_automl, Budget
from naiveml.core import BLANK_ID
from naiveml.surrogate import evaluator, table_surface

table = {(BLANK_ID, "p1"): 0.6, (BLANK_ID, "p2"): 0.7, ("t1", "p1"): 0.9, ("t1", "p2"): 0.65}
surface = table_surface(table, ["t1"], ["p1", "p2"])
catalog = surface.catalog(standard_predictor="p1")
score = evaluator(surface)

###############################################################################
# Naive search tests ``t1`` next to the standard predictor ``p1`` (0.9 beats
# 0.6) and the predictors on their own (0.7 beats 0.6), then glues the
# winners together.

naive = naive_automl(catalog, score, Budget(evaluations=100), seed=0)
for event in naive:
    print(f"{event.elapsed:8.5f}s  improved to {event.global_score:.2f}  via {event.component or 'blank'}")
print("naive picks", naive.final_pipeline.describe(), "worth", surface.value(naive.final_pipeline))

###############################################################################
# Quasi-naive search decides the predictor first and keeps it fixed while it
# looks at pre-processors, so it never builds the broken combination.

quasi = quasi_naive_automl(catalog, score, Budget(evaluations=100), seed=0)
quasi.run()
print("quasi-naive picks", quasi.final_pipeline.describe(), "worth", surface.value(quasi.final_pipeline))

best, best_score, n = brute_force(catalog, score)
print(f"exhaustive search: {best.describe()} worth {best_score} after {n} evaluations")

###############################################################################
# The diagnostic shows where the independence assumption breaks.

for report in naivety_violation(catalog, score):
    print(catalog.slot_name(report.slot), "violated" if report.violated else "fine", report.witnesses)
