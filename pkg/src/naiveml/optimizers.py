"""Naive and quasi-naive pipeline optimizers, baselines, the exhaustive oracle and repair.

Optimizers are iterables of :class:`TraceEvent`; an event is produced every time
the best score seen so far strictly improves. After the stream ends the
``final_pipeline`` attribute holds the composed incumbent.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .core import DEFAULTS, Catalog, Choice, Pipeline, sample_params
from .evaluation import EvalResult

logger = logging.getLogger(__name__)

BLANK = None  # a blank (identity) slot, as stored in Pipeline.slots
DEFAULT_CAP = 10_000

EvaluateFn = Callable[[Pipeline], EvalResult]


class SpaceTooLarge(ValueError):
    pass


class RepairExhausted(RuntimeError):
    """Not even the predictor-only pipeline is executable."""


@dataclass(frozen=True)
class Budget:
    seconds: float | None = None
    evaluations: int | None = None

    def __post_init__(self):
        if self.seconds is None and self.evaluations is None:
            raise ValueError("a budget needs a time limit or an evaluation limit")


@dataclass(frozen=True)
class TraceEvent:
    elapsed: float
    pipeline: Pipeline
    slot: int | None  # None for optimizers that work on whole pipelines
    component: str | None  # None for a blank slot
    params: dict | None  # None for default parametrization
    local_score: float
    global_score: float
    status: str
    raw_score: float | None = None


class _OutOfBudget(Exception):
    pass


class _Search:
    def __init__(self, catalog: Catalog, evaluate_fn: EvaluateFn, budget: Budget, clock=time.monotonic):
        self.catalog = catalog
        self.evaluate_fn = evaluate_fn
        self.budget = budget
        self.clock = clock
        self.history: list = []  # (pipeline, EvalResult) for every real evaluation
        self.final_pipeline: Pipeline | None = None
        self.final_score = -math.inf
        self._start = None

    @property
    def evaluation_count(self) -> int:
        return len(self.history)

    def elapsed(self) -> float:
        return self.clock() - self._start

    def _evaluate(self, pipeline: Pipeline) -> EvalResult:
        b = self.budget
        if b.evaluations is not None and len(self.history) >= b.evaluations:
            raise _OutOfBudget
        if b.seconds is not None and self.elapsed() >= b.seconds:
            raise _OutOfBudget
        result = self.evaluate_fn(pipeline)
        self.history.append((pipeline, result))
        return result

    def __iter__(self) -> Iterator[TraceEvent]:
        self._start = self.clock()
        try:
            yield from self._search()
        except _OutOfBudget:
            pass
        self._finish()

    def run(self) -> list:
        return list(self)

    def _search(self):
        raise NotImplementedError

    def _finish(self):
        pass


# --------------------------------------------------------------------------
# candidate pipelines


def _standard(catalog: Catalog) -> Choice:
    return Choice(catalog.standard_predictor)


def _check_candidate(slot: int, candidate, catalog: Catalog):
    s = catalog.slots[slot]
    if candidate is BLANK:
        if s.is_predictor:
            raise ValueError("the predictor slot cannot be blank")
        return
    if candidate not in [c.id for c in s.candidates]:
        raise ValueError(f"{candidate!r} is not a candidate of slot {catalog.slot_name(slot)}")


def _choice(candidate, params) -> Choice | None:
    if candidate is BLANK:
        return None
    if params is DEFAULTS or params is None:
        return Choice(candidate)
    return Choice(candidate, params)


def get_pipeline_naive(slot: int, candidate, params, catalog: Catalog) -> Pipeline:
    """Pipeline holding only ``candidate`` (plus the standard predictor for pre-processors)."""
    _check_candidate(slot, candidate, catalog)
    slots = [None] * len(catalog.slots)
    slots[catalog.predictor_index] = _standard(catalog)
    slots[slot] = _choice(candidate, params)
    return Pipeline(tuple(slots))


def get_pipeline_quasi(slot: int, candidate, params, decided: dict, catalog: Catalog) -> Pipeline:
    """Pipeline for ``candidate`` with every earlier decision plugged in at defaults.

    ``decided`` maps slot index to the component id chosen there (``None`` for
    a slot decided to stay blank).
    """
    _check_candidate(slot, candidate, catalog)
    if slot in decided:
        raise ValueError(f"slot {catalog.slot_name(slot)} is already decided")
    slots = [None] * len(catalog.slots)
    for s, comp in decided.items():
        _check_candidate(s, comp, catalog)
        slots[s] = _choice(comp, DEFAULTS)
    slots[slot] = _choice(candidate, params)
    p = catalog.predictor_index
    if slots[p] is None:
        slots[p] = _standard(catalog)
    return Pipeline(tuple(slots))


# --------------------------------------------------------------------------
# naive / quasi-naive


class NaiveAutoML(_Search):
    """Slot-wise algorithm selection at defaults, then round-robin random search
    over the parameters of each slot's selected component.

    With ``permutation`` set the optimizer is quasi-naive: slots are processed
    in that fixed order and every candidate pipeline carries the components
    already chosen for earlier slots.
    """

    def __init__(self, catalog, evaluate_fn, budget, seed=0, permutation=None, clock=time.monotonic):
        super().__init__(catalog, evaluate_fn, budget, clock)
        self.seed = seed
        self.quasi = permutation is not None
        if self.quasi:
            permutation = [int(s) for s in permutation]
            if sorted(permutation) != list(range(len(catalog.slots))):
                raise ValueError(f"{permutation} is not a permutation of the slots")
        self.permutation = permutation
        k1 = len(catalog.slots)
        self.order: list = []
        self.decided = [False] * k1
        self.best_component: list = [None] * k1
        self.best_params: list = [DEFAULTS] * k1
        self.best_local = [-math.inf] * k1
        self.best_global = -math.inf
        self.notes: list = []

    def _candidate(self, slot, candidate, params) -> Pipeline:
        if not self.quasi:
            return get_pipeline_naive(slot, candidate, params, self.catalog)
        position = self.order.index(slot)
        decided = {s: self.best_component[s] for s in self.order[:position]
                   if self.decided[s] and (self.best_component[s] is not None
                                           or not self.catalog.slots[s].is_predictor)}
        return get_pipeline_quasi(slot, candidate, params, decided, self.catalog)

    def incumbent(self) -> Pipeline:
        """Current per-slot choices composed into one pipeline."""
        slots = []
        for s, slot in enumerate(self.catalog.slots):
            comp = self.best_component[s]
            if comp is None:
                slots.append(_standard(self.catalog) if slot.is_predictor else None)
            else:
                slots.append(_choice(comp, self.best_params[s]))
        return Pipeline(tuple(slots))

    def _improve(self, slot, result: EvalResult, component, params):
        """Apply the strict-improvement rules; returns an event on a new global best."""
        v = result.value
        if not v > self.best_local[slot]:
            return None
        self.best_local[slot] = v
        self.best_component[slot] = component
        self.best_params[slot] = params
        if not v > self.best_global:
            return None
        self.best_global = v
        return TraceEvent(self.elapsed(), self.incumbent(), slot, component,
                          None if params is DEFAULTS else dict(params), v, v,
                          result.status, result.raw_score)

    def _search(self):
        rng = np.random.default_rng(self.seed)
        slots = self.catalog.slots
        if self.quasi:
            self.order = list(self.permutation)
        else:
            self.order = [int(s) for s in rng.permutation(len(slots))]

        memo: dict = {}
        for s in self.order:
            slot = slots[s]
            shuffled = [slot.candidates[i].id for i in rng.permutation(len(slot.candidates))]
            options = shuffled if slot.is_predictor else [BLANK] + shuffled
            for c in options:
                pipeline = self._candidate(s, c, DEFAULTS)
                result = memo.get(pipeline)
                if result is None:
                    result = self._evaluate(pipeline)
                    memo[pipeline] = result
                event = self._improve(s, result, c, DEFAULTS)
                if event is not None:
                    yield event
            self.decided[s] = True
            if self.best_local[s] == -math.inf:
                where = self.catalog.slot_name(s)
                if slot.is_predictor:
                    self.notes.append(f"{where}: every candidate failed, falling back to the standard predictor")
                else:
                    self.notes.append(f"{where}: every candidate failed, slot stays blank")
                logger.info(self.notes[-1])

        while True:
            active = False
            for s in self.order:
                comp = self.best_component[s]
                if comp is None:
                    continue
                spec = self.catalog.component(comp, s)
                if not spec.params:
                    continue
                active = True
                theta = sample_params(spec, rng)
                result = self._evaluate(self._candidate(s, comp, theta))
                event = self._improve(s, result, comp, Choice(comp, theta).params)
                if event is not None:
                    yield event
            if not active:
                return

    def _finish(self):
        self.final_pipeline = self.incumbent()
        self.final_score = self.best_global


def default_permutation(catalog: Catalog) -> list:
    """Predictor first, then the pre-processor slots in catalog order."""
    return [catalog.predictor_index] + catalog.preprocessor_indices


def naive_automl(catalog, evaluate_fn, budget, seed=0, clock=time.monotonic) -> NaiveAutoML:
    return NaiveAutoML(catalog, evaluate_fn, budget, seed, None, clock)


def quasi_naive_automl(catalog, evaluate_fn, budget, seed=0, permutation=None, clock=time.monotonic) -> NaiveAutoML:
    if permutation is None:
        permutation = default_permutation(catalog)
    return NaiveAutoML(catalog, evaluate_fn, budget, seed, permutation, clock)


# --------------------------------------------------------------------------
# baselines


class RandomSearch(_Search):
    """Uniform random search over whole pipelines.

    Each pre-processor slot is blank or one of its candidates with equal
    probability; each component keeps its defaults with probability 1/2 and is
    otherwise randomly parametrized.
    """

    def __init__(self, catalog, evaluate_fn, budget, seed=0, clock=time.monotonic):
        super().__init__(catalog, evaluate_fn, budget, clock)
        self.seed = seed

    def _draw(self, rng) -> Pipeline:
        slots = []
        for slot in self.catalog.slots:
            options = list(slot.candidates) if slot.is_predictor else [BLANK] + list(slot.candidates)
            spec = options[int(rng.integers(len(options)))]
            if spec is BLANK:
                slots.append(None)
            elif spec.params and rng.random() >= 0.5:
                slots.append(Choice(spec.id, sample_params(spec, rng)))
            else:
                slots.append(Choice(spec.id))
        return Pipeline(tuple(slots))

    def _search(self):
        rng = np.random.default_rng(self.seed)
        p = self.catalog.predictor_index
        while True:
            pipeline = self._draw(rng)
            result = self._evaluate(pipeline)
            if result.value > self.final_score:
                self.final_score = result.value
                self.final_pipeline = pipeline
                pred = pipeline.slots[p]
                yield TraceEvent(self.elapsed(), pipeline, None, pred.component, pred.explicit(),
                                 result.value, result.value, result.status, result.raw_score)

    def _finish(self):
        if self.final_pipeline is None:
            self.final_pipeline = get_pipeline_naive(self.catalog.predictor_index,
                                                     self.catalog.standard_predictor, DEFAULTS, self.catalog)


def random_search(catalog, evaluate_fn, budget, seed=0, clock=time.monotonic) -> RandomSearch:
    return RandomSearch(catalog, evaluate_fn, budget, seed, clock)


def enumerate_space(catalog: Catalog, cap: int = DEFAULT_CAP):
    """All default-parametrized pipelines in catalog order, blank first in pre-processor slots."""
    if catalog.space_size() > cap:
        raise SpaceTooLarge(f"search space has {catalog.space_size()} pipelines, cap is {cap}")
    options = [[Choice(c.id) for c in s.candidates] if s.is_predictor
               else [None] + [Choice(c.id) for c in s.candidates] for s in catalog.slots]
    return [Pipeline(combo) for combo in itertools.product(*options)]


class ExhaustiveSearch(_Search):
    """Evaluates every default-parametrized pipeline once, in enumeration order."""

    def __init__(self, catalog, evaluate_fn, budget=None, cap=DEFAULT_CAP, clock=time.monotonic):
        super().__init__(catalog, evaluate_fn, budget or Budget(evaluations=cap), clock)
        self.space = enumerate_space(catalog, cap)

    def _search(self):
        p = self.catalog.predictor_index
        for pipeline in self.space:
            result = self._evaluate(pipeline)
            if result.value > self.final_score:
                self.final_score = result.value
                self.final_pipeline = pipeline
                yield TraceEvent(self.elapsed(), pipeline, None, pipeline.slots[p].component, None,
                                 result.value, result.value, result.status, result.raw_score)

    def _finish(self):
        if self.final_pipeline is None:
            self.final_pipeline = self.space[0]


def brute_force(catalog: Catalog, evaluate_fn: EvaluateFn, cap: int = DEFAULT_CAP):
    """Exhaustive oracle: ``(best pipeline, oriented score, evaluation count)``.

    Ties keep the earliest pipeline in enumeration order.
    """
    search = ExhaustiveSearch(catalog, evaluate_fn, cap=cap)
    search.run()
    return search.final_pipeline, search.final_score, search.evaluation_count


# --------------------------------------------------------------------------
# diagnostics and repair


@dataclass
class SlotReport:
    slot: int
    violated: bool
    witnesses: list = field(default_factory=list)  # [(context, best), (context, best)]


def naivety_violation(catalog: Catalog, evaluate_fn: EvaluateFn, cap: int = DEFAULT_CAP) -> list:
    """Check, per slot, whether the best candidate depends on what fills the other slots.

    Every default-parametrized pipeline is evaluated once. For slot ``i`` and each
    context (an assignment of all other slots) the best option for ``i`` is
    taken, with ties broken by enumeration order; the slot is violated when two
    contexts disagree.
    """
    table = {p: evaluate_fn(p).value for p in enumerate_space(catalog, cap)}
    options = [[c.id for c in s.candidates] if s.is_predictor else [None] + [c.id for c in s.candidates]
               for s in catalog.slots]
    reports = []
    for i in range(len(catalog.slots)):
        others = options[:i] + options[i + 1:]
        first = None
        report = SlotReport(i, False)
        for context in itertools.product(*others):
            best, best_value = options[i][0], -math.inf
            for j, opt in enumerate(options[i]):
                combo = list(context[:i]) + [opt] + list(context[i:])
                value = table[Pipeline(tuple(None if c is None else Choice(c) for c in combo))]
                if j == 0 or value > best_value:
                    best, best_value = opt, value
            if first is None:
                first = (context, best)
            elif best != first[1]:
                report.violated = True
                report.witnesses = [first, (context, best)]
                break
        reports.append(report)
    return reports


def repair(pipeline: Pipeline, fit_probe: Callable[[Pipeline], bool]) -> Pipeline:
    """Blank pre-processors left to right until ``fit_probe`` accepts the pipeline."""
    if pipeline.slots[-1] is None:
        raise ValueError("predictor slot is blank")
    if fit_probe(pipeline):
        return pipeline
    for i in range(len(pipeline.slots) - 1):
        if pipeline.slots[i] is None:
            continue
        pipeline = pipeline.replace(i, None)
        if fit_probe(pipeline):
            return pipeline
    raise RepairExhausted(f"no executable reduction, last tried {pipeline.describe()}")


OPTIMIZERS = {
    "naive": naive_automl,
    "quasi-naive": quasi_naive_automl,
    "random": random_search,
    "brute-force": lambda catalog, evaluate_fn, budget, seed=0, clock=time.monotonic:
        ExhaustiveSearch(catalog, evaluate_fn, budget, clock=clock),
}
