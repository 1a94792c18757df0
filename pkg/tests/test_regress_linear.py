import numpy as np
import pytest

from pavetex.errors import RankDeficient, TooFewSamples
from pavetex.features import FeatureVector
from pavetex.regress import Dataset, LabeledSample, adjusted_r2, f_test_pvalue, ols_fit, vif, vif_from_r2
from pavetex.regress.linear import ols_arrays


def dataset(X, y):
    X = np.asarray(X, float)
    full = np.zeros((len(X), 3))
    full[:, :X.shape[1]] = X
    return Dataset.from_samples(
        LabeledSample(f"s{i}", "A", FeatureVector(*row), float(v)) for i, (row, v) in enumerate(zip(full, y)))


def test_exact_linear():
    p = np.linspace(0.1, 0.9, 10)
    fit = ols_fit(dataset(p[:, None], 2 * p + 1).with_features(("P",)))
    assert fit.coefficients[0] == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.sse == pytest.approx(0.0, abs=1e-20)
    assert fit.r2 == pytest.approx(1.0)


def test_adjusted_r2_arithmetic():
    assert adjusted_r2(0.85, 112, 1) == pytest.approx(0.84864, abs=1e-5)
    with pytest.raises(TooFewSamples):
        adjusted_r2(0.5, 3, 2)


def test_vif_reference_value():
    assert vif_from_r2(0.9670) == pytest.approx(30.30, abs=0.01)
    assert vif_from_r2(1.0) == np.inf


def test_normal_equations_oracle():
    rng = np.random.default_rng(30)
    X = rng.normal(size=(30, 2))
    y = 1.5 + X @ [0.7, -2.0] + rng.normal(0, 0.1, 30)
    fit = ols_arrays(X, y)
    A = np.column_stack([np.ones(30), X])
    beta = np.linalg.solve(A.T @ A, A.T @ y)
    assert fit.intercept == pytest.approx(beta[0], abs=1e-8)
    assert fit.coefficients == pytest.approx(beta[1:], abs=1e-8)
    resid = y - A @ beta
    assert fit.sse == pytest.approx(resid @ resid, rel=1e-10)
    assert fit.adjusted_r2 <= fit.r2
    assert 0.0 <= fit.p_value <= 1.0


def test_f_test_against_scipy():
    from scipy import stats
    r2, n, m = 0.3, 40, 2
    f = (r2 / m) / ((1 - r2) / (n - m - 1))
    assert f_test_pvalue(r2, n, m) == pytest.approx(stats.f.sf(f, m, n - m - 1), rel=1e-10)


def test_adding_feature_never_increases_sse():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(50, 3))
    y = X[:, 0] + 0.2 * rng.normal(size=50)
    ds = dataset(X, y + 5)
    assert ols_fit(ds, ("P", "D")).sse <= ols_fit(ds, ("P",)).sse + 1e-12
    assert ols_fit(ds, ("P", "D", "K")).sse <= ols_fit(ds, ("P", "D")).sse + 1e-12


def test_errors():
    with pytest.raises(TooFewSamples):
        ols_arrays(np.ones((2, 1)), [1.0, 2.0])
    X = np.column_stack([np.arange(6.0), 2 * np.arange(6.0)])
    with pytest.raises(RankDeficient):
        ols_arrays(X, np.arange(6.0))


def test_vif_independent_near_one():
    rng = np.random.default_rng(2)
    ds = dataset(rng.normal(size=(500, 3)), np.ones(500))
    v = vif(ds)
    assert all(1.0 <= x <= 1.2 for x in v.values())


def test_vif_duplicate_is_inf():
    rng = np.random.default_rng(3)
    a = rng.normal(size=40)
    ds = dataset(np.column_stack([a, a, rng.normal(size=40)]), np.ones(40))
    v = vif(ds)
    assert v["P"] == np.inf and v["D"] == np.inf
    assert np.isfinite(v["K"]) and v["K"] >= 1.0


def test_vif_matches_auxiliary_regression():
    rng = np.random.default_rng(4)
    a = rng.normal(size=60)
    b = 0.9 * a + 0.3 * rng.normal(size=60)
    ds = dataset(np.column_stack([a, b]), np.ones(60))
    aux = ols_arrays(a[:, None], b)
    assert vif(ds, ("P", "D"))["D"] == pytest.approx(1 / (1 - aux.r2), rel=1e-10)
