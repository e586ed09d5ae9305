import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from naiveml.components import (
    PCA,
    BernoulliNB,
    ComponentIncompatibility,
    DecisionTree,
    DegenerateData,
    GaussianNB,
    KNearestNeighbors,
    MajorityPredictor,
    MinMaxScaler,
    SelectPercentile,
    StandardScaler,
    VarianceThreshold,
    f_scores,
    fit_pipeline,
    predict_proba,
)
from naiveml.core import Choice, Dataset, Pipeline

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
matrices = arrays(float, st.tuples(st.integers(3, 25), st.integers(1, 5)), elements=finite)


def labels_for(n, C=2):
    return np.arange(n) % C


def test_predictor_only_pipeline(builtin_catalog):
    data = Dataset(np.random.default_rng(0).normal(size=(20, 3)), labels_for(20), 2)
    fitted = fit_pipeline(Pipeline((None, None, Choice("majority"))), data, builtin_catalog)
    assert len(fitted.steps) == 1


def test_standardizer_then_bernoulli_is_incompatible(builtin_catalog):
    X = np.linspace(0, 1, 20)[:, None]
    data = Dataset(X, labels_for(20), 2)
    fit_pipeline(Pipeline((None, None, Choice("bnb"))), data, builtin_catalog)
    with pytest.raises(ComponentIncompatibility):
        fit_pipeline(Pipeline((Choice("standardizer"), None, Choice("bnb"))), data, builtin_catalog)


XOR_X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
XOR_Y = np.array([0, 1, 1, 0])


def test_xor_needs_depth_two():
    # enumeration oracle: no single axis-aligned split separates XOR, two levels do
    for j, thr in itertools.product(range(2), [0.5]):
        side = XOR_X[:, j] <= thr
        assert set(XOR_Y[side]) == {0, 1}
    tree = DecisionTree(max_depth=2).fit(XOR_X, XOR_Y, 2)
    assert np.all(tree.predict_proba(XOR_X).argmax(axis=1) == XOR_Y)
    stump = DecisionTree(max_depth=1).fit(XOR_X, XOR_Y, 2)
    assert np.mean(stump.predict_proba(XOR_X).argmax(axis=1) != XOR_Y) == 0.5


def test_tree_tie_break_prefers_lowest_feature_and_threshold():
    X = np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=float)
    y = np.array([0, 0, 1, 1])
    tree = DecisionTree(max_depth=1).fit(X, y, 2)
    assert tree.root_.feature == 0 and tree.root_.threshold == 1.5
    X2 = np.array([[0.0], [1.0], [2.0]])
    y2 = np.array([0, 1, 0])
    tree2 = DecisionTree(max_depth=1).fit(X2, y2, 2)
    assert tree2.root_.threshold == 0.5


def test_majority_probabilities():
    y = np.array([0] * 8 + [1] * 2)
    P = MajorityPredictor().fit(np.zeros((10, 1)), y, 2).predict_proba(np.zeros((4, 1)))
    np.testing.assert_allclose(P, np.tile([0.8, 0.2], (4, 1)), atol=1e-12)


def test_one_nearest_neighbour_recovers_training_labels():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(15, 3))
    y = rng.integers(0, 3, 15)
    P = KNearestNeighbors(n_neighbors=1).fit(X, y, 3).predict_proba(X)
    np.testing.assert_allclose(P, np.eye(3)[y], atol=1e-12)


def test_knn_distance_ties_use_lower_row():
    X = np.array([[1.0], [-1.0]])
    y = np.array([1, 0])
    P = KNearestNeighbors(n_neighbors=1).fit(X, y, 2).predict_proba(np.array([[0.0]]))
    assert P[0].argmax() == 1


def test_gaussian_nb_far_clusters():
    rng = np.random.default_rng(0)
    X = np.concatenate([rng.normal(-5, 1, 200), rng.normal(5, 1, 200)])[:, None]
    y = np.repeat([0, 1], 200)
    P = GaussianNB().fit(X, y, 2).predict_proba(np.array([[-5.0]]))
    # closed form for unit variances: log odds = ((x-5)^2 - (x+5)^2)/2 = -10x = 50 at x=-5
    assert P[0, 0] >= 0.999


def test_bernoulli_nb_range_rule():
    X = np.array([[0.2, 0.9], [0.8, 0.1], [0.7, 0.6], [0.1, 0.3]])
    y = np.array([0, 1, 1, 0])
    m = BernoulliNB().fit(X, y, 2)
    assert m.predict_proba(np.array([[5.0, -3.0]])).shape == (1, 2)
    with pytest.raises(ComponentIncompatibility):
        BernoulliNB().fit(X - 0.5, y, 2)


def test_predict_width_mismatch(builtin_catalog):
    data = Dataset(np.random.default_rng(0).normal(size=(20, 3)), labels_for(20), 2)
    fitted = fit_pipeline(Pipeline((None, None, Choice("gnb"))), data, builtin_catalog)
    with pytest.raises(ValueError):
        predict_proba(fitted, np.zeros((2, 4)))


def test_class_missing_from_training_still_gets_a_column():
    X = np.arange(6, dtype=float)[:, None]
    y = np.array([0, 0, 0, 2, 2, 2])
    for model in (DecisionTree(), KNearestNeighbors(), GaussianNB(), MajorityPredictor()):
        P = model.fit(X, y, 3).predict_proba(X)
        assert P.shape == (6, 3)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(2, 3))
def test_predictor_rows_are_distributions(X, C):
    y = labels_for(len(X), C)
    Xb = (X - X.min()) / (np.ptp(X) or 1.0)
    for model, data in ((DecisionTree(), X), (KNearestNeighbors(), X), (GaussianNB(), X),
                        (MajorityPredictor(), X), (BernoulliNB(), Xb)):
        P = model.fit(data, y, C).predict_proba(data)
        assert np.all(P >= 0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_scaler_properties(X):
    y = labels_for(len(X))
    mm = MinMaxScaler().fit(X, y, 2).transform(X)
    assert np.all(np.isfinite(mm))
    assert mm.min() >= -1e-12 and mm.max() <= 1 + 1e-12
    ss = StandardScaler().fit(X, y, 2).transform(X)
    assert np.all(np.isfinite(ss))
    varying = X.std(axis=0) > 1e-6 * (1 + np.abs(X).max())
    np.testing.assert_allclose(ss[:, varying].mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(ss[:, varying].var(axis=0), 1.0, atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(matrices, st.floats(0, 10))
def test_variance_threshold_property(X, threshold):
    y = labels_for(len(X))
    variances = X.var(axis=0)
    try:
        vt = VarianceThreshold(threshold).fit(X, y, 2)
    except DegenerateData:
        assert np.all(variances <= threshold)
        return
    kept = set(vt.keep_)
    for j, v in enumerate(variances):
        assert (v > threshold) == (j in kept)
    assert np.all(np.isfinite(vt.transform(X)))


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(3, 25), st.integers(1, 6)), elements=st.floats(-100, 100)),
       st.integers(1, 6))
def test_pca_property(X, requested):
    y = labels_for(len(X))
    try:
        pca = PCA(requested).fit(X, y, 2)
    except DegenerateData:
        assert np.allclose(X, X[0])
        return
    Z = pca.transform(X)
    assert np.all(np.isfinite(Z))
    Xc = X - X.mean(axis=0)
    s = np.linalg.svd(Xc, compute_uv=False)
    rank = int(np.sum(s > s.max() * max(X.shape) * np.finfo(float).eps))
    assert Z.shape[1] == min(requested, rank)
    Zc = Z - Z.mean(axis=0)
    G = Zc.T @ Zc
    off = G - np.diag(np.diag(G))
    assert np.all(np.abs(off) <= 1e-6 * max(1.0, np.abs(G).max()))


def test_pca_output_orthogonal_simple():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 4))
    Z = PCA(3).fit(X, labels_for(50), 2).transform(X)
    Zc = Z - Z.mean(axis=0)
    G = Zc.T @ Zc
    assert np.all(np.abs(G[~np.eye(3, dtype=bool)]) <= 1e-6)


def test_select_percentile_top_scores_with_ties():
    X = np.array([[0, 5, 0, 1], [0, 6, 0, 2], [1, 1, 1, 3], [1, 2, 1, 4]], dtype=float)
    y = np.array([0, 0, 1, 1])
    scores = f_scores(X, y, 2)
    assert scores[0] == scores[2]
    sp = SelectPercentile(25).fit(X, y, 2)
    assert list(sp.keep_) == [0]
    sp = SelectPercentile(50).fit(X, y, 2)
    assert list(sp.keep_) == [0, 2]


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(1, 100))
def test_select_percentile_property(X, pct):
    y = labels_for(len(X))
    sp = SelectPercentile(pct).fit(X, y, 2)
    scores = f_scores(X, y, 2)
    expected = sorted(range(X.shape[1]), key=lambda j: (-scores[j], j))[:len(sp.keep_)]
    assert sorted(expected) == list(sp.keep_)
    assert np.all(np.isfinite(sp.transform(X)))
