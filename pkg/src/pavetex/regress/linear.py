"""Ordinary least squares with goodness-of-fit diagnostics and VIF."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import ConstantLabels, RankDeficient, TooFewSamples

COLLINEAR_TOL = 1e-12


@dataclass(frozen=True)
class LinearFit:
    feature_names: tuple
    coefficients: tuple
    intercept: float
    sse: float
    r2: float
    adjusted_r2: float
    p_value: float
    n: int

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.intercept + X @ np.array(self.coefficients)

    def to_dict(self):
        return {
            "feature_names": list(self.feature_names),
            "coefficients": list(self.coefficients),
            "intercept": self.intercept,
            "sse": self.sse,
            "r2": self.r2,
            "adjusted_r2": self.adjusted_r2,
            "p_value": self.p_value,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["feature_names"]), tuple(d["coefficients"]), d["intercept"], d["sse"],
                   d["r2"], d["adjusted_r2"], d["p_value"], d["n"])


def adjusted_r2(r2: float, n: int, m: int) -> float:
    """R^2 penalized for ``m`` predictors over ``n`` observations."""
    if n - m - 1 <= 0:
        raise TooFewSamples(f"adjusted R^2 needs n > m + 1 (n={n}, m={m})")
    return 1.0 - (1.0 - r2) * (n - 1) / (n - m - 1)


def r_squared(y, yhat) -> float:
    y = np.asarray(y, dtype=float)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise ConstantLabels("R^2 is undefined for constant labels")
    return 1.0 - float(np.sum((y - np.asarray(yhat, dtype=float)) ** 2)) / sst


def f_test_pvalue(r2: float, n: int, m: int) -> float:
    """Upper-tail probability of the overall regression F statistic."""
    df2 = n - m - 1
    if r2 >= 1.0:
        return 0.0
    f = (r2 / m) / ((1.0 - r2) / df2)
    if f <= 0:
        return 1.0
    return float(special.betainc(df2 / 2.0, m / 2.0, df2 / (df2 + m * f)))


def vif_from_r2(r2: float) -> float:
    return np.inf if r2 >= 1.0 else 1.0 / (1.0 - r2)


def ols_arrays(X, y, feature_names=None) -> LinearFit:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, m = X.shape
    if n <= m + 1:
        raise TooFewSamples(f"OLS with {m} feature(s) needs more than {m + 1} samples, got {n}")
    design = np.column_stack([np.ones(n), X])
    if np.linalg.matrix_rank(design) < m + 1:
        raise RankDeficient("design matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    yhat = design @ beta
    sse = float(np.sum((y - yhat) ** 2))
    r2 = r_squared(y, yhat)
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(m))
    return LinearFit(
        feature_names=names,
        coefficients=tuple(float(b) for b in beta[1:]),
        intercept=float(beta[0]),
        sse=sse,
        r2=r2,
        adjusted_r2=adjusted_r2(r2, n, m),
        p_value=f_test_pvalue(r2, n, m),
        n=n,
    )


def ols_fit(ds, features=None) -> LinearFit:
    names = ds.feature_names if features is None else tuple(features)
    return ols_arrays(ds.X(names), ds.y, names)


def vif(ds, features=None) -> dict[str, float]:
    """Variance inflation factor of each feature against the others.

    A perfectly collinear feature reports ``inf`` instead of failing.
    """
    names = ds.feature_names if features is None else tuple(features)
    if len(names) < 2:
        raise ValueError("VIF needs at least two features")
    X = ds.X(names)
    n = len(X)
    out = {}
    for j, name in enumerate(names):
        target = X[:, j]
        sst = float(np.sum((target - target.mean()) ** 2))
        if sst == 0.0:
            out[name] = np.inf
            continue
        # projection onto [1, others]; lstsq tolerates redundant columns
        design = np.column_stack([np.ones(n), np.delete(X, j, axis=1)])
        beta, *_ = np.linalg.lstsq(design, target, rcond=None)
        r2 = 1.0 - float(np.sum((target - design @ beta) ** 2)) / sst
        out[name] = np.inf if 1.0 - r2 <= COLLINEAR_TOL else vif_from_r2(r2)
    return out
