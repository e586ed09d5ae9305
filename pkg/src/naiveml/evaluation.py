"""Metrics, splitters and the budgeted candidate evaluation shared by all optimizers."""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import rankdata

from .components import ComponentIncompatibility, DegenerateData, fit_pipeline
from .core import Catalog, Dataset, Pipeline, TaskKind

LOG_FLOOR = 1e-15


class Metric(str, enum.Enum):
    AUROC = "auroc"
    LOG_LOSS = "log_loss"
    ERROR_RATE = "error_rate"

    @property
    def maximize(self) -> bool:
        return self is Metric.AUROC

    def orient(self, raw: float) -> float:
        """Map a raw value to the higher-is-better scale."""
        return raw if self.maximize else -raw

    def supports(self, task: TaskKind) -> bool:
        return self is not Metric.AUROC or task == TaskKind.BINARY

    def score(self, labels, probs) -> float:
        if self is Metric.AUROC:
            return auroc(labels, probs[:, 1])
        if self is Metric.LOG_LOSS:
            return log_loss(labels, probs)
        return error_rate(labels, probs)

    @classmethod
    def parse(cls, name: str) -> "Metric":
        aliases = {"auroc": cls.AUROC, "auc": cls.AUROC, "logloss": cls.LOG_LOSS,
                   "log_loss": cls.LOG_LOSS, "error": cls.ERROR_RATE, "error_rate": cls.ERROR_RATE}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown metric {name!r}") from None


def auroc(labels, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic (ties count 1/2)."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores differ in length")
    pos = labels == 1
    P, N = int(pos.sum()), int((~pos).sum())
    if P == 0 or N == 0:
        raise ValueError("auroc needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - P * (P + 1) / 2.0) / (P * N))


def log_loss(labels, probs) -> float:
    labels = np.asarray(labels, dtype=int)
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 2 or probs.shape[0] != len(labels):
        raise ValueError(f"probability matrix of shape {probs.shape} does not match {len(labels)} labels")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= probs.shape[1]:
        raise ValueError("label index outside the probability columns")
    p = np.clip(probs[np.arange(len(labels)), labels], LOG_FLOOR, 1.0)
    return float(-np.log(p).mean())


def error_rate(labels, probs) -> float:
    labels = np.asarray(labels, dtype=int)
    return float(np.mean(np.argmax(probs, axis=1) != labels))


# --------------------------------------------------------------------------
# splitters


def kfold_splits(n: int, k: int, labels, seed: int) -> list:
    """Stratified k-fold: per-class shuffled indices are dealt round-robin to folds."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ValueError(f"cannot make {k} folds from {n} instances")
    labels = np.asarray(labels)
    if len(labels) != n:
        raise ValueError("labels must have length n")
    rng = np.random.default_rng(seed)
    dealt = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        dealt.extend(rng.permutation(members))
    fold_of = np.empty(n, dtype=int)
    fold_of[np.array(dealt, dtype=int)] = np.arange(n) % k
    everything = np.arange(n)
    return [(everything[fold_of != f], everything[fold_of == f]) for f in range(k)]


def stratified_split(labels, train_fraction: float, rng: np.random.Generator):
    """One stratified shuffle split with exactly floor(train_fraction * n) training rows.

    Per-class quotas are floored and the leftover rows go to the classes with the
    largest fractional remainders (lower class index first on ties).
    """
    labels = np.asarray(labels)
    n = len(labels)
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n_train = math.floor(train_fraction * n + 1e-9)
    if n_train < 1 or n_train >= n:
        raise ValueError(f"split of {n} rows at {train_fraction} leaves an empty side")
    classes = np.unique(labels)
    sizes = np.array([np.sum(labels == c) for c in classes])
    exact = train_fraction * sizes
    quota = np.floor(exact + 1e-9).astype(int)
    remainder = exact - quota
    for j in np.argsort(-remainder, kind="stable")[: n_train - quota.sum()]:
        quota[j] += 1
    train, test = [], []
    for c, q in zip(classes, quota):
        members = rng.permutation(np.flatnonzero(labels == c))
        train.extend(members[:q])
        test.extend(members[q:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def mccv_splits(n: int, train_fraction: float, repetitions: int, labels, seed: int) -> list:
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if len(labels) != n:
        raise ValueError("labels must have length n")
    rng = np.random.default_rng(seed)
    return [stratified_split(labels, train_fraction, rng) for _ in range(repetitions)]


# --------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class KFold:
    k: int = 5


@dataclass(frozen=True)
class MCCV:
    train_fraction: float = 0.9
    repetitions: int = 10


@dataclass(frozen=True)
class ValidationSpec:
    scheme: KFold | MCCV = field(default_factory=KFold)
    seed: int = 0
    deadline: float = 300.0  # seconds per evaluation
    metric: Metric = Metric.AUROC

    def __post_init__(self):
        if isinstance(self.scheme, KFold) and self.scheme.k < 2:
            raise ValueError("k must be at least 2")
        if isinstance(self.scheme, MCCV):
            if not 0 < self.scheme.train_fraction < 1 or self.scheme.repetitions < 1:
                raise ValueError("invalid Monte-Carlo cross-validation settings")
        if not self.deadline > 0:
            raise ValueError("deadline must be positive")

    def splits(self, labels) -> list:
        n = len(labels)
        if isinstance(self.scheme, KFold):
            return kfold_splits(n, self.scheme.k, labels, self.seed)
        return mccv_splits(n, self.scheme.train_fraction, self.scheme.repetitions, labels, self.seed)

    def with_seed(self, seed: int) -> "ValidationSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class EvalResult:
    status: str  # "ok" | "timeout" | "failed"
    oriented_score: float | None = None
    raw_fold_scores: tuple = ()
    wall_time: float = 0.0
    failure_reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def value(self) -> float:
        """Oriented score, with anything that did not finish counting as -inf."""
        return self.oriented_score if self.ok else -math.inf

    @property
    def raw_score(self) -> float | None:
        return float(np.mean(self.raw_fold_scores)) if self.ok else None


class _DeadlineExpired(Exception):
    pass


class TickingClock:
    """Deterministic test clock that advances by ``tick`` seconds on every reading."""

    def __init__(self, tick: float, start: float = 0.0):
        self.tick = tick
        self.now = start

    def __call__(self) -> float:
        current = self.now
        self.now += self.tick
        return current


def evaluate(pipeline: Pipeline, data: Dataset, spec: ValidationSpec, catalog: Catalog,
             clock=time.monotonic) -> EvalResult:
    """Cross-validate ``pipeline`` on ``data``; never raises for a bad candidate.

    The deadline is checked before each fold and before each component fit.
    """
    if not spec.metric.supports(data.task_kind):
        raise ValueError(f"{spec.metric.value} is not defined for {data.task_kind.value} tasks")
    start = clock()

    def checkpoint():
        if clock() - start >= spec.deadline:
            raise _DeadlineExpired

    raw = []
    try:
        for train_idx, test_idx in spec.splits(data.labels):
            checkpoint()
            fitted = fit_pipeline(pipeline, data.subset(train_idx), catalog, checkpoint)
            probs = fitted.predict_proba(data.features[test_idx])
            raw.append(spec.metric.score(data.labels[test_idx], probs))
    except _DeadlineExpired:
        return EvalResult("timeout", raw_fold_scores=tuple(raw), wall_time=clock() - start,
                          failure_reason="deadline reached")
    except (ComponentIncompatibility, DegenerateData) as exc:
        return EvalResult("failed", wall_time=clock() - start,
                          failure_reason=f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # noqa: BLE001  a broken candidate must not abort the search
        return EvalResult("failed", wall_time=clock() - start,
                          failure_reason=f"{type(exc).__name__}: {exc}")
    oriented = float(np.mean([spec.metric.orient(r) for r in raw]))
    return EvalResult("ok", oriented, tuple(raw), clock() - start)
