"""
Repairing a pipeline that cannot run
====================================

Bernoulli naive Bayes only accepts inputs in [0, 1]. After standardization
the data has negative values, so the fit fails. Repair blanks pre-processors
from the left until the pipeline fits.
"""

import numpy as np

from naiveml import Choice, Pipeline, repair
from naiveml.components import ComponentIncompatibility, fit_pipeline
from naiveml.core import ComponentSpec, Dataset, SlotRole, make_catalog

catalog = make_catalog(
    [("data_preprocessor", [ComponentSpec("standardizer", SlotRole.DATA_PREPROCESSOR, "standard_scaler")]),
     ("feature_preprocessor", [ComponentSpec("pca", SlotRole.FEATURE_PREPROCESSOR, "pca")]),
     ("predictor", [ComponentSpec("bnb", SlotRole.PREDICTOR, "bernoulli_nb")])],
    "bnb")
rng = np.random.default_rng(0)
train = Dataset(rng.random((60, 3)), (rng.random(60) > 0.5).astype(int), 2)


def probe(pipeline):
    try:
        fit_pipeline(pipeline, train, catalog)
    except ComponentIncompatibility as exc:
        print("  cannot fit", pipeline.describe(), "-", exc)
        return False
    print("  fits", pipeline.describe())
    return True


broken = Pipeline((Choice("standardizer"), None, Choice("bnb")))
print("repairing", broken.describe())
print("result:", repair(broken, probe).describe())
