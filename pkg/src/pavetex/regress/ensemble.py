"""Gradient-boosted and bagged tree ensembles plus simple baselines."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InvalidHyperparameter
from .linear import LinearFit, ols_arrays
from .trees import RegressionTree

MODEL_KINDS = ("gbt", "rf", "linear", "mean")


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "gbt"
    n_estimators: int = 60
    max_depth: int | None = 5
    learning_rate: float = 0.1
    min_samples_leaf: int = 1
    bootstrap: bool = True
    max_features: int | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidHyperparameter(f"unknown model kind {self.kind!r}; expected {MODEL_KINDS}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _as_xy(data, y=None):
    if y is None:
        return np.asarray(data.X(), dtype=float), data.y
    return np.atleast_2d(np.asarray(data, dtype=float)), np.asarray(y, dtype=float)


def _predict_input(features):
    arr = np.asarray(features, dtype=float)
    return arr.ndim == 1, np.atleast_2d(arr)


class GbtModel:
    """Additive ensemble of shrunken least-squares trees on residuals."""

    def __init__(self, init, trees, learning_rate, n_estimators, max_depth, seed=0,
                 train_mse=None):
        self.init = float(init)
        self.trees = list(trees)
        self.learning_rate = float(learning_rate)
        self.n_estimators = int(n_estimators)
        self.max_depth = max_depth
        self.seed = seed
        self.train_mse = list(train_mse or [])

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.init)
        for tree in self.trees:
            out = out + self.learning_rate * tree.predict(X)
        return out

    def staged_predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.init)
        yield out.copy()
        for tree in self.trees:
            out = out + self.learning_rate * tree.predict(X)
            yield out.copy()

    def to_dict(self):
        return {
            "init": self.init,
            "learning_rate": self.learning_rate,
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["init"], [RegressionTree.from_dict(t) for t in d["trees"]],
                   d["learning_rate"], d["n_estimators"], d["max_depth"], d.get("seed", 0))


def gbt_fit(train, y=None, n_estimators=60, max_depth=5, learning_rate=0.1, seed=0,
            min_samples_leaf=1) -> GbtModel:
    """Squared-error gradient boosting.

    ``train`` is a Dataset, or a feature matrix when ``y`` is given.
    """
    if n_estimators < 0 or not learning_rate > 0 or max_depth is None or max_depth < 1:
        raise InvalidHyperparameter("need n_estimators >= 0, learning_rate > 0, max_depth >= 1")
    X, y = _as_xy(train, y)
    if len(y) == 0:
        raise ValueError("empty training set")
    init = float(y.mean())
    pred = np.full(len(y), init)
    history = [float(np.mean((y - pred) ** 2))]
    trees = []
    for _ in range(n_estimators):
        residual = y - pred
        tree = RegressionTree(max_depth=max_depth, min_samples_leaf=min_samples_leaf).fit(X, residual)
        pred = pred + learning_rate * tree.predict(X)
        trees.append(tree)
        history.append(float(np.mean((y - pred) ** 2)))
    return GbtModel(init, trees, learning_rate, n_estimators, max_depth, seed, history)


def gbt_predict(model: GbtModel, features):
    single, X = _predict_input(features)
    out = model.predict(X)
    return float(out[0]) if single else out


class RfModel:
    """Mean of trees grown on bootstrap resamples with per-node feature sampling."""

    def __init__(self, trees, n_estimators, max_features, bootstrap, seed, min_samples_leaf=1):
        self.trees = list(trees)
        self.n_estimators = int(n_estimators)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = seed
        self.min_samples_leaf = min_samples_leaf

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_dict(self):
        return {
            "n_estimators": self.n_estimators,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "min_samples_leaf": self.min_samples_leaf,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        return cls([RegressionTree.from_dict(t) for t in d["trees"]], d["n_estimators"],
                   d["max_features"], d["bootstrap"], d["seed"], d.get("min_samples_leaf", 1))


def rf_fit(train, y=None, n_estimators=60, seed=0, max_features=None, bootstrap=True,
           min_samples_leaf=1) -> RfModel:
    """Random forest; ``max_features`` defaults to ceil(sqrt(m)).

    Tree ``i`` draws from its own generator seeded by ``(seed, i)``.
    """
    if n_estimators < 1 or min_samples_leaf < 1:
        raise InvalidHyperparameter("need n_estimators >= 1 and min_samples_leaf >= 1")
    X, y = _as_xy(train, y)
    n, m = X.shape
    if n == 0:
        raise ValueError("empty training set")
    if max_features is None:
        max_features = math.ceil(math.sqrt(m))
    if not 1 <= max_features <= m:
        raise InvalidHyperparameter(f"max_features must lie in [1, {m}]")
    trees = []
    for i in range(n_estimators):
        rng = np.random.default_rng([seed, i])
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree = RegressionTree(max_depth=None, min_samples_leaf=min_samples_leaf,
                              max_features=max_features, rng=rng)
        trees.append(tree.fit(X, y, idx))
    return RfModel(trees, n_estimators, max_features, bootstrap, seed, min_samples_leaf)


def rf_predict(model: RfModel, features):
    single, X = _predict_input(features)
    out = model.predict(X)
    return float(out[0]) if single else out


class MeanModel:
    """Predicts the training-label mean everywhere."""

    def __init__(self, mean):
        self.mean = float(mean)

    def predict(self, X) -> np.ndarray:
        return np.full(len(np.atleast_2d(X)), self.mean)

    def to_dict(self):
        return {"mean": self.mean}

    @classmethod
    def from_dict(cls, d):
        return cls(d["mean"])


class LinearModel:
    def __init__(self, fit: LinearFit):
        self.fit = fit

    def predict(self, X) -> np.ndarray:
        return self.fit.predict(X)

    def to_dict(self):
        return self.fit.to_dict()

    @classmethod
    def from_dict(cls, d):
        return cls(LinearFit.from_dict(d))


def fit_model(spec: ModelSpec, X, y, seed: int = 0):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if spec.kind == "gbt":
        return gbt_fit(X, y, spec.n_estimators, spec.max_depth, spec.learning_rate, seed,
                       spec.min_samples_leaf)
    if spec.kind == "rf":
        return rf_fit(X, y, spec.n_estimators, seed, spec.max_features, spec.bootstrap,
                      spec.min_samples_leaf)
    if spec.kind == "linear":
        return LinearModel(ols_arrays(X, y))
    return MeanModel(y.mean())


MODEL_CLASSES = {"gbt": GbtModel, "rf": RfModel, "linear": LinearModel, "mean": MeanModel}
