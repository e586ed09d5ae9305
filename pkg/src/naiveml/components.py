"""Built-in pre-processors and predictors, and fitting whole pipelines.

Every component follows the same small protocol: ``fit(X, y, class_count)``
returns the fitted object, pre-processors expose ``transform(X)`` and
predictors expose ``predict_proba(X)``. Components are registered under their
``implementation_key``, which is what catalogs refer to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Catalog, Dataset, Pipeline

PROB_FLOOR = 1e-15


class ComponentIncompatibility(Exception):
    """A component received input outside of the domain it can handle."""


class DegenerateData(Exception):
    """The input carries too little variation for a component to be fitted."""


def floor_probabilities(P: np.ndarray) -> np.ndarray:
    P = np.clip(P, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return P / P.sum(axis=1, keepdims=True)


# --------------------------------------------------------------------------
# pre-processors


class MinMaxScaler:
    def __init__(self):
        pass

    def fit(self, X, y, class_count):
        self.lo_ = X.min(axis=0)
        span = X.max(axis=0) - self.lo_
        self.span_ = np.where(span > 0, span, 1.0)
        return self

    def transform(self, X):
        return (X - self.lo_) / self.span_


class StandardScaler:
    def __init__(self):
        pass

    def fit(self, X, y, class_count):
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        # constant columns are centered but left unscaled
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X):
        return (X - self.mean_) / self.scale_


class VarianceThreshold:
    def __init__(self, threshold=0.0):
        self.threshold = float(threshold)

    def fit(self, X, y, class_count):
        variances = X.var(axis=0)
        self.keep_ = np.flatnonzero(variances > self.threshold)
        if len(self.keep_) == 0:
            raise DegenerateData(f"no column has variance above {self.threshold}")
        return self

    def transform(self, X):
        return X[:, self.keep_]


class PCA:
    def __init__(self, n_components=2):
        self.n_components = int(n_components)

    def fit(self, X, y, class_count):
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
        tol = s.max(initial=0.0) * max(X.shape) * np.finfo(float).eps
        rank = int(np.sum(s > tol))
        if rank == 0:
            raise DegenerateData("all columns are constant")
        m = min(self.n_components, rank)
        V = Vt[:m]
        # fix the sign so the largest loading of each axis is positive
        signs = np.sign(V[np.arange(m), np.abs(V).argmax(axis=1)])
        self.components_ = V * signs[:, None]
        return self

    def transform(self, X):
        return (X - self.mean_) @ self.components_.T


def f_scores(X, y, class_count):
    """One-way ANOVA F statistic of each column against the class labels.

    Constant columns score 0; columns with zero within-class spread but
    separated class means score ``inf``.
    """
    n, d = X.shape
    present = [c for c in range(class_count) if np.any(y == c)]
    grand = X.mean(axis=0)
    between = np.zeros(d)
    within = np.zeros(d)
    for c in present:
        Xc = X[y == c]
        between += len(Xc) * (Xc.mean(axis=0) - grand) ** 2
        within += ((Xc - Xc.mean(axis=0)) ** 2).sum(axis=0)
    df_between = max(len(present) - 1, 1)
    df_within = max(n - len(present), 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = (between / df_between) / (within / df_within)
    F[np.isnan(F)] = 0.0
    return F


class SelectPercentile:
    def __init__(self, percentile=50):
        self.percentile = float(percentile)

    def fit(self, X, y, class_count):
        d = X.shape[1]
        if d == 0:
            raise DegenerateData("no columns to select from")
        count = max(1, math.ceil(self.percentile * d / 100.0 - 1e-9))
        scores = f_scores(X, y, class_count)
        # stable sort on the negated score keeps lower column indices first on ties
        order = np.argsort(-scores, kind="stable")
        self.scores_ = scores
        self.keep_ = np.sort(order[:count])
        return self

    def transform(self, X):
        return X[:, self.keep_]


# --------------------------------------------------------------------------
# predictors


class MajorityPredictor:
    def __init__(self):
        pass

    def fit(self, X, y, class_count):
        counts = np.bincount(y, minlength=class_count).astype(float)
        self.prior_ = counts / counts.sum()
        return self

    def predict_proba(self, X):
        return floor_probabilities(np.tile(self.prior_, (X.shape[0], 1)))


@dataclass
class _Node:
    counts: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None


def _gini(counts):
    total = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / total[..., None]
        g = 1.0 - (p ** 2).sum(axis=-1)
    return np.where(total > 0, g, 0.0)


class DecisionTree:
    """CART classifier with Gini impurity.

    A node is split whenever it is impure and some split respects
    ``min_samples_leaf``, even if the split does not lower the impurity (this is
    what lets XOR-like structure be learned). The split with the smallest
    weighted child impurity wins; ties go to the lowest feature index and then
    the lowest threshold.
    """

    def __init__(self, max_depth=30, min_samples_leaf=1):
        self.max_depth = int(max_depth)
        self.min_samples_leaf = int(min_samples_leaf)

    def fit(self, X, y, class_count):
        self.class_count_ = class_count
        self.root_ = self._grow(X, y, 0)
        return self

    def _grow(self, X, y, depth):
        counts = np.bincount(y, minlength=self.class_count_).astype(float)
        node = _Node(counts)
        if depth >= self.max_depth or np.count_nonzero(counts) <= 1:
            return node
        split = self._best_split(X, y)
        if split is None:
            return node
        node.feature, node.threshold = split
        mask = X[:, node.feature] <= node.threshold
        node.left = self._grow(X[mask], y[mask], depth + 1)
        node.right = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def _best_split(self, X, y):
        n, d = X.shape
        if n < 2:
            return None
        leaf = self.min_samples_leaf
        onehot = np.eye(self.class_count_)[y]
        total = onehot.sum(axis=0)
        best, best_score = None, math.inf
        for j in range(d):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            left = np.cumsum(onehot[order], axis=0)[:-1]
            right = total - left
            nl = np.arange(1, n)
            valid = (xs[1:] > xs[:-1]) & (nl >= leaf) & (n - nl >= leaf)
            if not valid.any():
                continue
            score = (nl * _gini(left) + (n - nl) * _gini(right)) / n
            score = np.where(valid, score, math.inf)
            i = int(np.argmin(score))
            # first index of the minimum is the lowest threshold for this feature
            if score[i] < best_score - 1e-12:
                best_score = score[i]
                best = (j, 0.5 * (xs[i] + xs[i + 1]))
        return best

    def predict_proba(self, X):
        out = np.empty((X.shape[0], self.class_count_))
        for r, x in enumerate(X):
            node = self.root_
            while node.left is not None:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[r] = node.counts / node.counts.sum()
        return floor_probabilities(out)


class KNearestNeighbors:
    def __init__(self, n_neighbors=5, weights="uniform"):
        self.n_neighbors = int(n_neighbors)
        self.weights = weights

    def fit(self, X, y, class_count):
        self.X_ = np.array(X)
        self.y_ = np.array(y)
        self.class_count_ = class_count
        return self

    def predict_proba(self, X):
        k = min(self.n_neighbors, len(self.X_))
        d2 = ((X[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        # stable sort: equal distances resolve to the lower training row
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out = np.zeros((X.shape[0], self.class_count_))
        for r in range(X.shape[0]):
            idx = nearest[r]
            if self.weights == "distance":
                dist = np.sqrt(d2[r, idx])
                exact = dist == 0
                w = exact.astype(float) if exact.any() else 1.0 / dist
            else:
                w = np.ones(k)
            np.add.at(out[r], self.y_[idx], w)
        out /= out.sum(axis=1, keepdims=True)
        return floor_probabilities(out)


class GaussianNB:
    def __init__(self, var_smoothing=1e-9):
        self.var_smoothing = float(var_smoothing)

    def fit(self, X, y, class_count):
        C, d = class_count, X.shape[1]
        counts = np.bincount(y, minlength=C).astype(float)
        self.log_prior_ = np.log(np.where(counts > 0, counts / counts.sum(), PROB_FLOOR))
        self.mean_ = np.zeros((C, d))
        self.var_ = np.ones((C, d))
        eps = self.var_smoothing * max(float(X.var(axis=0).max(initial=0.0)), 1e-12)
        for c in range(C):
            Xc = X[y == c]
            if len(Xc):
                self.mean_[c] = Xc.mean(axis=0)
                self.var_[c] = Xc.var(axis=0)
        self.var_ = self.var_ + eps
        return self

    def predict_proba(self, X):
        ll = -0.5 * (np.log(2 * np.pi * self.var_)[None, :, :]
                     + (X[:, None, :] - self.mean_[None, :, :]) ** 2 / self.var_[None, :, :]).sum(axis=2)
        ll = ll + self.log_prior_
        ll -= ll.max(axis=1, keepdims=True)
        P = np.exp(ll)
        return floor_probabilities(P / P.sum(axis=1, keepdims=True))


class BernoulliNB:
    """Bernoulli naive Bayes on inputs binarized at ``binarize``.

    Only defined for inputs in [0, 1]; training data outside that range raises
    :class:`ComponentIncompatibility`. Prediction inputs are clipped instead.
    """

    def __init__(self, alpha=1.0, binarize=0.5):
        self.alpha = float(alpha)
        self.binarize = float(binarize)

    def fit(self, X, y, class_count):
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ComponentIncompatibility(
                f"bernoulli_nb needs inputs in [0, 1], got range [{X.min():.3g}, {X.max():.3g}]")
        B = (X > self.binarize).astype(float)
        counts = np.bincount(y, minlength=class_count).astype(float)
        self.log_prior_ = np.log(np.where(counts > 0, counts / counts.sum(), PROB_FLOOR))
        ones = np.array([B[y == c].sum(axis=0) for c in range(class_count)]).reshape(class_count, -1)
        p = (ones + self.alpha) / (counts[:, None] + 2 * self.alpha)
        self.log_p_ = np.log(p)
        self.log_q_ = np.log1p(-p)
        return self

    def predict_proba(self, X):
        B = (np.clip(X, 0.0, 1.0) > self.binarize).astype(float)
        ll = B @ self.log_p_.T + (1 - B) @ self.log_q_.T + self.log_prior_
        ll -= ll.max(axis=1, keepdims=True)
        P = np.exp(ll)
        return floor_probabilities(P / P.sum(axis=1, keepdims=True))


PREPROCESSORS = {
    "min_max_scaler": MinMaxScaler,
    "standard_scaler": StandardScaler,
    "variance_threshold": VarianceThreshold,
    "pca": PCA,
    "select_percentile": SelectPercentile,
}

PREDICTORS = {
    "decision_tree": DecisionTree,
    "knn": KNearestNeighbors,
    "gaussian_nb": GaussianNB,
    "bernoulli_nb": BernoulliNB,
    "majority": MajorityPredictor,
}

IMPLEMENTATIONS = {**PREPROCESSORS, **PREDICTORS}


def build(implementation_key: str, params: dict):
    try:
        cls = IMPLEMENTATIONS[implementation_key]
    except KeyError:
        raise KeyError(f"no built-in component {implementation_key!r}") from None
    return cls(**params)


# --------------------------------------------------------------------------
# pipelines


@dataclass(frozen=True)
class FittedPipeline:
    steps: tuple  # (component id, fitted object), blank slots omitted, predictor last
    input_width: int
    class_count: int

    def transform(self, X):
        for _, step in self.steps[:-1]:
            X = step.transform(X)
        return X

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.input_width:
            raise ValueError(f"expected {self.input_width} columns, got shape {X.shape}")
        return self.steps[-1][1].predict_proba(self.transform(X))


def fit_pipeline(pipeline: Pipeline, train: Dataset, catalog: Catalog, checkpoint=None) -> FittedPipeline:
    """Fit the slots of ``pipeline`` left to right on ``train``.

    ``checkpoint`` is called before every component fit; evaluation uses it to
    enforce its deadline cooperatively.
    """
    if train.n == 0:
        raise ValueError("cannot fit on an empty dataset")
    X, y = train.features, train.labels
    steps = []
    last = len(pipeline.slots) - 1
    for i, choice in enumerate(pipeline.slots):
        if choice is None:
            if i == last:
                raise ValueError("predictor slot is blank")
            continue
        if checkpoint is not None:
            checkpoint()
        spec = catalog.component(choice.component, i)
        if not np.all(np.isfinite(X)):
            raise DegenerateData(f"non-finite values reach {choice.component}")
        if X.shape[1] == 0:
            raise DegenerateData(f"no columns reach {choice.component}")
        fitted = build(spec.implementation_key, choice.values(spec)).fit(X, y, train.class_count)
        steps.append((choice.component, fitted))
        if i != last:
            X = fitted.transform(X)
    return FittedPipeline(tuple(steps), train.width, train.class_count)


def predict_proba(fitted: FittedPipeline, X) -> np.ndarray:
    return fitted.predict_proba(X)
