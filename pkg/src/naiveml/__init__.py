"""Naive and quasi-naive pipeline optimization with baselines, oracles and anytime analyses."""

from .core import (
    BLANK_ID,
    DEFAULTS,
    Catalog,
    Choice,
    ComponentSpec,
    Dataset,
    ParamSpec,
    Pipeline,
    Slot,
    SlotRole,
    TaskKind,
    default_params,
    encode_and_impute,
    load_catalog,
    sample_params,
    validate_catalog,
)
from .components import ComponentIncompatibility, DegenerateData, FittedPipeline, fit_pipeline, predict_proba
from .evaluation import MCCV, EvalResult, KFold, Metric, ValidationSpec, auroc, evaluate, kfold_splits, log_loss, mccv_splits
from .optimizers import (
    Budget,
    RepairExhausted,
    TraceEvent,
    brute_force,
    get_pipeline_naive,
    get_pipeline_quasi,
    naive_automl,
    naivety_violation,
    quasi_naive_automl,
    random_search,
    repair,
)
from .surrogate import SurrogateSurface, make_surface, surrogate_eval

__version__ = "0.1.0"
