import pytest

from naiveml.core import BLANK_ID, ComponentSpec, ParamSpec, SlotRole, make_catalog
from naiveml.surrogate import evaluator, table_surface

# the worked naivety-failure example: one pre-processor t1 and predictors p1/p2
FAILURE_TABLE = {
    (BLANK_ID, "p1"): 0.6,
    (BLANK_ID, "p2"): 0.7,
    ("t1", "p1"): 0.9,
    ("t1", "p2"): 0.65,
}


@pytest.fixture
def failure_surface():
    return table_surface(FAILURE_TABLE, ["t1"], ["p1", "p2"])


@pytest.fixture
def failure_catalog(failure_surface):
    return failure_surface.catalog(standard_predictor="p1")


@pytest.fixture
def failure_eval(failure_surface):
    return evaluator(failure_surface)


@pytest.fixture
def builtin_catalog():
    """Three-slot catalog over the built-in components, decision tree as standard predictor."""
    pre = [ComponentSpec("min_max", SlotRole.DATA_PREPROCESSOR, "min_max_scaler"),
           ComponentSpec("standardizer", SlotRole.DATA_PREPROCESSOR, "standard_scaler")]
    feat = [ComponentSpec("pca", SlotRole.FEATURE_PREPROCESSOR, "pca",
                          (ParamSpec("n_components", "integer", lo=1, hi=5, default=2),))]
    preds = [ComponentSpec("tree", SlotRole.PREDICTOR, "decision_tree",
                           (ParamSpec("max_depth", "integer", lo=1, hi=10, default=10),)),
             ComponentSpec("knn", SlotRole.PREDICTOR, "knn",
                           (ParamSpec("n_neighbors", "integer", lo=1, hi=9, default=5),)),
             ComponentSpec("gnb", SlotRole.PREDICTOR, "gaussian_nb"),
             ComponentSpec("bnb", SlotRole.PREDICTOR, "bernoulli_nb"),
             ComponentSpec("majority", SlotRole.PREDICTOR, "majority")]
    return make_catalog([("data_preprocessor", pre), ("feature_preprocessor", feat),
                         ("predictor", preds)], "tree")
