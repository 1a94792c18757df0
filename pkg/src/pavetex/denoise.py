"""Noise-variance-ratio adaptive filtering, baseline filters and MSE scoring."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import InvalidWindow, ShapeMismatch
from .gridio import DepthMap

MAD_TO_SIGMA = 1.4826


@dataclass(frozen=True)
class NoiseModel:
    sigma_eta_sq: float

    def __post_init__(self):
        if not self.sigma_eta_sq >= 0:
            raise ValueError("noise variance must be non-negative")


@dataclass(frozen=True)
class FilterConfig:
    window: int = 5
    clamp_ratio: bool = True


def _check_window(window: int, shape=None) -> None:
    if window < 3 or window % 2 == 0:
        raise InvalidWindow(f"window must be odd and >= 3, got {window}")
    if shape is not None and window > min(shape):
        raise InvalidWindow(f"window {window} exceeds map size {shape[1]}x{shape[0]}")


def estimate_noise_variance(dmap: DepthMap) -> NoiseModel:
    """Robust noise variance from the MAD of horizontal first differences.

    Differencing doubles the noise variance, hence the division by two.  A
    map with no horizontal variation yields zero.
    """
    d = np.diff(dmap.values, axis=1).ravel()
    if d.size == 0:
        return NoiseModel(0.0)
    mad = np.median(np.abs(d - np.median(d)))
    sigma = MAD_TO_SIGMA * mad
    return NoiseModel(float(sigma * sigma / 2.0))


def local_mean_var(z: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Edge-replicated box mean and (population) variance."""
    offset = z.mean()
    zc = z - offset
    mean_c = ndimage.uniform_filter(zc, size=window, mode="nearest")
    sq = ndimage.uniform_filter(zc * zc, size=window, mode="nearest")
    var = sq - mean_c * mean_c
    # cancellation residue below this level is indistinguishable from a flat window
    var[var <= 64 * np.finfo(float).eps * sq] = 0.0
    return mean_c + offset, var


def adaptive_local_filter(dmap: DepthMap, cfg: FilterConfig = FilterConfig(),
                          noise: NoiseModel | None = None) -> DepthMap:
    """Pull each depth toward its local mean by the noise/local variance ratio.

    ``z' = z - r (z - mean)`` with ``r = sigma_eta^2 / sigma_local^2``,
    optionally clamped to 1.  Flat neighbourhoods return the local mean.
    """
    _check_window(cfg.window, dmap.shape)
    if noise is None:
        noise = estimate_noise_variance(dmap)
    z = dmap.values
    if noise.sigma_eta_sq == 0.0:
        return DepthMap(z)
    mean, var = local_mean_var(z, cfg.window)
    flat = var <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = noise.sigma_eta_sq / var
    if cfg.clamp_ratio:
        ratio = np.minimum(ratio, 1.0)
    out = z - ratio * (z - mean)
    out[flat] = mean[flat]
    return DepthMap(out)


def mean_filter(dmap: DepthMap, window: int) -> DepthMap:
    _check_window(window)
    return DepthMap(ndimage.uniform_filter(dmap.values, size=window, mode="nearest"))


def median_filter(dmap: DepthMap, window: int) -> DepthMap:
    _check_window(window)
    return DepthMap(ndimage.median_filter(dmap.values, size=window, mode="nearest"))


def bilateral_filter(dmap: DepthMap, window: int, sigma_space: float,
                     sigma_range: float) -> DepthMap:
    _check_window(window)
    if not (sigma_space > 0 and sigma_range > 0):
        raise ValueError("bilateral sigmas must be positive")
    return DepthMap(_kernels.bilateral(dmap.values, window, sigma_space, sigma_range))


def filter_mse(original: DepthMap, filtered: DepthMap) -> float:
    if original.shape != filtered.shape:
        raise ShapeMismatch(f"{original.shape} vs {filtered.shape}")
    diff = original.values - filtered.values
    return float(np.mean(diff * diff))


METHODS = ("mean", "median", "bilateral", "proposed")


def apply_method(dmap: DepthMap, method: str, window: int = 5,
                 sigma_space: float | None = None, sigma_range: float | None = None) -> DepthMap:
    """Run one of the named filters with defaults suited to ``dmap``.

    Bilateral defaults: spatial sigma of half the window, range sigma of
    three times the estimated noise standard deviation.
    """
    if method == "mean":
        return mean_filter(dmap, window)
    if method == "median":
        return median_filter(dmap, window)
    if method == "bilateral":
        if sigma_space is None:
            sigma_space = window / 2.0
        if sigma_range is None:
            sigma_range = 3.0 * np.sqrt(estimate_noise_variance(dmap).sigma_eta_sq)
            if sigma_range <= 0:
                sigma_range = 1e-6 + float(np.ptp(dmap.values))
        return bilateral_filter(dmap, window, sigma_space, sigma_range)
    if method == "proposed":
        return adaptive_local_filter(dmap, FilterConfig(window=window))
    raise ValueError(f"unknown filter method {method!r}; expected one of {METHODS}")
