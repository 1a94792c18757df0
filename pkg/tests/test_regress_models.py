import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pavetex.errors import InvalidHyperparameter
from pavetex.regress import (GbtModel, ModelSpec, RegressionTree, RfModel, fit_model, gbt_fit,
                             gbt_predict, rf_fit, rf_predict)
from pavetex.synth import linear_feature_dataset


def exhaustive_best_split(X, y, min_leaf=1):
    """Lowest SSE over every (feature, midpoint) split; ties by feature then threshold."""
    best = (np.inf, -1, 0.0)
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            if left.sum() < min_leaf or (~left).sum() < min_leaf:
                continue
            sse = ((y[left] - y[left].mean()) ** 2).sum() + ((y[~left] - y[~left].mean()) ** 2).sum()
            if sse < best[0] - 1e-12:
                best = (sse, f, thr)
    return best


def test_single_split_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 20)
    y = np.where(x > 0.4, 2.0, -1.0) + rng.normal(0, 0.3, 20)
    model = gbt_fit(x[:, None], y, n_estimators=1, max_depth=1, learning_rate=1.0)
    sse, f, thr = exhaustive_best_split(x[:, None], y)
    assert model.train_mse[-1] == pytest.approx(sse / 20, rel=1e-12)
    assert model.trees[0].feature[0] == f and model.trees[0].threshold[0] == thr


def test_split_oracle_multifeature():
    rng = np.random.default_rng(1)
    for _ in range(20):
        X = rng.integers(0, 6, (25, 3)).astype(float)
        y = rng.normal(size=25)
        tree = RegressionTree(max_depth=1).fit(X, y)
        sse, f, thr = exhaustive_best_split(X, y)
        pred = tree.predict(X)
        assert ((y - pred) ** 2).sum() == pytest.approx(sse, rel=1e-9, abs=1e-12)
        assert (tree.feature[0], tree.threshold[0]) == (f, thr)


def test_tie_break_lowest_feature():
    X = np.array([[0, 0], [0, 0], [1, 1], [1, 1]], float)
    y = np.array([0, 0, 1, 1], float)
    tree = RegressionTree(max_depth=1).fit(X, y)
    assert tree.feature[0] == 0 and tree.threshold[0] == 0.5


def test_min_samples_leaf_respected():
    X = np.arange(10.0)[:, None]
    y = np.r_[np.zeros(9), 10.0]
    tree = RegressionTree(max_depth=1, min_samples_leaf=3).fit(X, y)
    leaves = tree.apply(X)
    assert min(np.bincount(leaves)[np.bincount(leaves) > 0]) >= 3


def test_tree_depth_and_serialization():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(60, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1]
    tree = RegressionTree(max_depth=4).fit(X, y)
    assert tree.depth() <= 4
    back = RegressionTree.from_dict(tree.to_dict())
    assert np.array_equal(back.predict(X), tree.predict(X))
    assert back.node_count == tree.node_count


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.0), st.integers(1, 4))
def test_gbt_training_mse_nonincreasing(seed, lr, depth):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(40, 2))
    y = X[:, 0] ** 2 + rng.normal(0, 0.1, 40)
    model = gbt_fit(X, y, n_estimators=30, max_depth=depth, learning_rate=lr)
    assert np.all(np.diff(model.train_mse) <= 1e-15)


def test_gbt_constant_target():
    X = np.random.default_rng(0).normal(size=(15, 2))
    model = gbt_fit(X, np.full(15, 3.5))
    assert np.all(model.predict(X) == 3.5)
    assert gbt_predict(model, [100.0, -100.0]) == 3.5


def test_gbt_fits_nonlinear():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, (200, 2))
    y = X[:, 0] ** 2 + X[:, 1]
    pred = gbt_fit(X, y).predict(X)
    assert 1 - np.mean((pred - y) ** 2) / y.var() >= 0.98


def test_gbt_staged_predict_and_dataset_input():
    ds = linear_feature_dataset(10, seed=0).with_features(("P", "D"))
    model = gbt_fit(ds, n_estimators=5)
    stages = list(model.staged_predict(ds.X()))
    assert len(stages) == 6
    assert np.array_equal(stages[-1], model.predict(ds.X()))
    assert len(model.trees) == model.n_estimators == 5
    assert all(t.depth() <= 5 for t in model.trees)


def test_gbt_roundtrip():
    ds = linear_feature_dataset(10, seed=0)
    model = gbt_fit(ds, n_estimators=8)
    back = GbtModel.from_dict(model.to_dict())
    assert np.array_equal(back.predict(ds.X()), model.predict(ds.X()))


@pytest.mark.parametrize("kwargs", [dict(learning_rate=0), dict(max_depth=0), dict(n_estimators=-1)])
def test_gbt_invalid(kwargs):
    with pytest.raises(InvalidHyperparameter):
        gbt_fit(np.ones((3, 1)), np.ones(3), **kwargs)


def test_rf_single_sample():
    model = rf_fit(np.array([[0.3, 0.2]]), np.array([1.7]), n_estimators=5)
    assert rf_predict(model, [9.0, 9.0]) == 1.7


def test_rf_one_tree_no_bootstrap_equals_tree():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 1))
    y = rng.normal(size=30)
    rf = rf_fit(X, y, n_estimators=1, bootstrap=False)
    tree = RegressionTree().fit(X, y)
    assert np.array_equal(rf.predict(X), tree.predict(X))


def test_rf_holdout_fit():
    rng = np.random.default_rng(4)
    X = rng.uniform(size=(100, 2))
    y = 3 * X[:, 0]
    model = rf_fit(X[:80], y[:80], seed=1)
    pred = model.predict(X[80:])
    assert 1 - np.sum((pred - y[80:]) ** 2) / np.sum((y[80:] - y[80:].mean()) ** 2) >= 0.9


def test_rf_deterministic_and_roundtrip():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 3))
    y = X.sum(axis=1)
    a = rf_fit(X, y, n_estimators=10, seed=7)
    b = rf_fit(X, y, n_estimators=10, seed=7)
    assert np.array_equal(a.predict(X), b.predict(X))
    assert a.max_features == 2  # ceil(sqrt(3))
    back = RfModel.from_dict(a.to_dict())
    assert np.array_equal(back.predict(X), a.predict(X))


def test_rf_invalid():
    with pytest.raises(InvalidHyperparameter):
        rf_fit(np.ones((3, 2)), np.ones(3), n_estimators=0)
    with pytest.raises(InvalidHyperparameter):
        rf_fit(np.ones((3, 2)), np.ones(3), max_features=3)


def test_model_spec_kinds():
    with pytest.raises(InvalidHyperparameter):
        ModelSpec(kind="svm")
    X = np.random.default_rng(0).normal(size=(20, 2))
    y = X[:, 0] * 2 + 1
    for kind in ("gbt", "rf", "linear", "mean"):
        m = fit_model(ModelSpec(kind=kind, n_estimators=5), X, y, seed=0)
        assert m.predict(X).shape == (20,)
