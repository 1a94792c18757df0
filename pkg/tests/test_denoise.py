import numpy as np
import pytest

from pavetex.denoise import (METHODS, FilterConfig, NoiseModel, adaptive_local_filter,
                             apply_method, bilateral_filter, estimate_noise_variance, filter_mse,
                             local_mean_var, mean_filter, median_filter)
from pavetex.errors import InvalidWindow, ShapeMismatch
from pavetex.gridio import DepthMap

from conftest import step_edge


def test_noise_zero_on_flat_plane():
    assert estimate_noise_variance(DepthMap(np.full((16, 16), 0.5))).sigma_eta_sq == 0.0


def test_noise_estimate_recovers_sigma(rng):
    z = 0.3 + 0.001 * np.arange(256)[None, :] + rng.normal(0, 0.01, (256, 256))
    est = estimate_noise_variance(DepthMap(z)).sigma_eta_sq
    assert 0.00008 <= est <= 0.00012


def test_noise_estimate_offset_invariant(rng):
    z = rng.normal(0, 0.02, (64, 64))
    a = estimate_noise_variance(DepthMap(z)).sigma_eta_sq
    b = estimate_noise_variance(DepthMap(z + 17.0)).sigma_eta_sq
    assert a == pytest.approx(b, rel=1e-9)


def test_zero_noise_returns_input_exactly(rng):
    m = DepthMap(rng.uniform(size=(32, 32)))
    out = adaptive_local_filter(m, FilterConfig(5), NoiseModel(0.0))
    assert out.values.tobytes() == m.values.tobytes()


def test_ratio_one_gives_local_mean(rng):
    m = DepthMap(rng.uniform(size=(9, 9)))
    mean, var = local_mean_var(m.values, 3)
    out = adaptive_local_filter(m, FilterConfig(3), NoiseModel(float(var[4, 4])))
    assert out.values[4, 4] == pytest.approx(mean[4, 4], abs=1e-12)


def test_local_mean_var_matches_loop(rng):
    z = rng.normal(size=(8, 7))
    mean, var = local_mean_var(z, 3)
    padded = np.pad(z, 1, mode="edge")
    for y in range(8):
        for x in range(7):
            win = padded[y:y + 3, x:x + 3]
            assert mean[y, x] == pytest.approx(win.mean(), abs=1e-12)
            assert var[y, x] == pytest.approx(win.var(), abs=1e-12)


def test_adaptive_beats_mean_on_step(step_fixture):
    noisy, clean = step_fixture
    proposed = adaptive_local_filter(noisy, FilterConfig(5))
    mean = mean_filter(noisy, 5)
    assert filter_mse(clean, proposed) < filter_mse(clean, mean)


def test_adaptive_preserves_mean_interior_dominated(rng):
    z = 10.0 + rng.normal(0, 1e-3, (128, 128))
    out = adaptive_local_filter(DepthMap(z), FilterConfig(5))
    assert abs(out.values.mean() - z.mean()) <= 1e-6 * abs(z.mean())


def test_adaptive_no_overshoot(rng):
    noisy, _ = step_edge(64, 0.05, seed=3)
    out = adaptive_local_filter(noisy, FilterConfig(5)).values
    padded = np.pad(noisy.values, 2, mode="edge")
    from numpy.lib.stride_tricks import sliding_window_view
    win = sliding_window_view(padded, (5, 5))
    lo, hi = win.min(axis=(2, 3)), win.max(axis=(2, 3))
    assert np.all(out >= lo - 1e-12) and np.all(out <= hi + 1e-12)


@pytest.mark.parametrize("window", [2, 1, 4])
def test_invalid_window(window, rng):
    with pytest.raises(InvalidWindow):
        adaptive_local_filter(DepthMap(rng.uniform(size=(8, 8))), FilterConfig(window))


def test_window_larger_than_map(rng):
    with pytest.raises(InvalidWindow):
        adaptive_local_filter(DepthMap(rng.uniform(size=(4, 4))), FilterConfig(5))


@pytest.mark.parametrize("method", METHODS)
def test_constant_map_fixed_point(method):
    m = DepthMap(np.full((9, 9), 0.7))
    out = apply_method(m, method, 3)
    assert np.allclose(out.values, 0.7, atol=1e-15)


def test_median_removes_spike():
    z = np.zeros((7, 7))
    z[3, 3] = 5.0
    assert np.all(median_filter(DepthMap(z), 3).values == 0.0)


def test_mean_filter_center():
    m = DepthMap(np.arange(1, 10, dtype=float).reshape(3, 3))
    assert mean_filter(m, 3).values[1, 1] == pytest.approx(5.0)


def test_bilateral_matches_loop(rng):
    z = rng.uniform(size=(6, 7))
    out = bilateral_filter(DepthMap(z), 3, 1.5, 0.2).values
    pad = np.pad(z, 1, mode="edge")
    for y in range(6):
        for x in range(7):
            num = den = 0.0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    v = pad[y + 1 + dy, x + 1 + dx]
                    w = np.exp(-(dx * dx + dy * dy) / (2 * 1.5**2)) * np.exp(-(v - z[y, x]) ** 2 / (2 * 0.2**2))
                    num += w * v
                    den += w
            assert out[y, x] == pytest.approx(num / den, abs=1e-12)


def test_bilateral_rejects_bad_sigma(rng):
    with pytest.raises(ValueError):
        bilateral_filter(DepthMap(rng.uniform(size=(5, 5))), 3, 0.0, 1.0)


def test_filter_mse_arithmetic(rng):
    a = DepthMap(rng.uniform(size=(16, 16)))
    assert filter_mse(a, a) == 0.0
    assert filter_mse(a, DepthMap(a.values + 0.1)) == pytest.approx(0.01)
    b = DepthMap(rng.uniform(size=(16, 16)))
    total = 0.0
    for i in range(16):
        for j in range(16):
            total += (a.values[i, j] - b.values[i, j]) ** 2
    assert filter_mse(a, b) == pytest.approx(total / 256, rel=1e-12)
    assert filter_mse(a, b) == filter_mse(b, a)


def test_filter_mse_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        filter_mse(DepthMap(np.zeros((2, 2))), DepthMap(np.zeros((2, 3))))


@pytest.mark.parametrize("method", METHODS)
def test_translation_equivariance_interior(method, rng):
    z = rng.uniform(size=(40, 40))
    shifted = np.roll(z, (3, 2), axis=(0, 1))
    a = apply_method(DepthMap(z), method, 5, 2.5, 0.3).values
    b = apply_method(DepthMap(shifted), method, 5, 2.5, 0.3).values
    if method == "proposed":
        # the noise estimate sees the wrapped seam, so fix it explicitly
        nm = NoiseModel(0.01)
        a = adaptive_local_filter(DepthMap(z), FilterConfig(5), nm).values
        b = adaptive_local_filter(DepthMap(shifted), FilterConfig(5), nm).values
    assert np.allclose(np.roll(a, (3, 2), axis=(0, 1))[10:30, 10:30], b[10:30, 10:30], atol=1e-12)


def test_unknown_method():
    with pytest.raises(ValueError):
        apply_method(DepthMap(np.eye(5)), "gaussian")
