"""Prediction metrics, calibration lines and stratified k-fold cross-validation."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConstantLabels, ShapeMismatch, TooFewSamples
from .dataset import Dataset, zscore_fit_array
from .ensemble import ModelSpec, fit_model

METRIC_NAMES = ("mse", "rmse", "mae", "r2", "slope", "intercept")


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    r2: float | None
    slope: float | None
    intercept: float | None
    n: int

    def to_dict(self):
        return asdict(self)


def metrics(y, yhat, allow_constant: bool = False) -> MetricsReport:
    """MSE, RMSE, MAE, R^2 and the calibration line ``yhat ~ slope * y + intercept``.

    With ``allow_constant`` a constant label vector reports ``None`` for the
    quantities that depend on label variance instead of raising.
    """
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if len(y) != len(yhat) or len(y) == 0:
        raise ShapeMismatch(f"label/prediction lengths {len(y)} and {len(yhat)}")
    err = y - yhat
    mse = float(np.mean(err * err))
    mae = float(np.mean(np.abs(err)))
    yc = y - y.mean()
    sst = float(np.dot(yc, yc))
    if sst == 0.0:
        if not allow_constant:
            raise ConstantLabels("R^2 and calibration are undefined for constant labels")
        r2 = slope = intercept = None
    else:
        r2 = 1.0 - float(np.dot(err, err)) / sst
        slope = float(np.dot(yc, yhat - yhat.mean())) / sst
        intercept = float(yhat.mean() - slope * y.mean())
    return MetricsReport(mse, math.sqrt(mse), mae, r2, slope, intercept, len(y))


def stratified_folds(ds: Dataset, k: int, seed: int = 0) -> np.ndarray:
    """Fold index per sample.

    Strata are visited in name order; each stratum's members (ordered by id)
    are shuffled and dealt round-robin, continuing the rotation across strata
    so fold sizes differ by at most one.
    """
    if k < 2:
        raise TooFewSamples("k-fold cross-validation needs k >= 2")
    if len(ds) < k:
        raise TooFewSamples(f"{len(ds)} samples cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(ds), dtype=int)
    pos = 0
    for members in ds.strata().values():
        for i in rng.permutation(len(members)):
            folds[members[i]] = pos % k
            pos += 1
    return folds


@dataclass
class FoldResult:
    fold: int
    train_ids: list
    validation_ids: list
    predictions: list
    labels: list
    metrics: MetricsReport

    def to_dict(self):
        return {
            "fold": self.fold,
            "n_train": len(self.train_ids),
            "validation_ids": list(self.validation_ids),
            "labels": list(self.labels),
            "predictions": list(self.predictions),
            "metrics": self.metrics.to_dict(),
        }


@dataclass
class CvReport:
    k: int
    seed: int
    feature_names: tuple
    model: ModelSpec
    folds: list = field(default_factory=list)

    def metric_arrays(self) -> dict[str, list]:
        return {name: [getattr(f.metrics, name) for f in self.folds] for name in METRIC_NAMES}

    def means(self) -> dict[str, float | None]:
        out = {}
        for name, values in self.metric_arrays().items():
            vals = [v for v in values if v is not None]
            out[name] = float(np.mean(vals)) if vals else None
        return out

    def to_dict(self):
        return {
            "k": self.k,
            "seed": self.seed,
            "feature_names": list(self.feature_names),
            "model": self.model.to_dict(),
            "folds": [f.to_dict() for f in self.folds],
            "per_fold": self.metric_arrays(),
            "mean": self.means(),
        }


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def kfold_cv(ds: Dataset, k: int = 5, model: ModelSpec = ModelSpec(), seed: int = 0,
             feature_names=None) -> CvReport:
    """Stratified k-fold CV; the scaler is refit on every training partition."""
    names = tuple(feature_names) if feature_names is not None else ds.feature_names
    folds = stratified_folds(ds, k, seed)
    X = ds.X(names)
    y = ds.y
    ids = ds.ids
    report = CvReport(k, seed, names, model)
    for f in range(k):
        val = np.nonzero(folds == f)[0]
        tr = np.nonzero(folds != f)[0]
        scaler = zscore_fit_array(X[tr], names)
        fitted = fit_model(model, scaler.transform(X[tr]), y[tr], fold_seed(seed, f))
        pred = fitted.predict(scaler.transform(X[val]))
        report.folds.append(FoldResult(
            fold=f,
            train_ids=[ids[i] for i in tr],
            validation_ids=[ids[i] for i in val],
            predictions=[float(v) for v in pred],
            labels=[float(v) for v in y[val]],
            metrics=metrics(y[val], pred, allow_constant=True),
        ))
    return report
