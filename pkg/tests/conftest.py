import numpy as np
import pytest

from pavetex.gridio import DepthMap


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def step_edge(n=256, sigma=0.01, seed=0):
    """Left half 0, right half 1, plus Gaussian noise; returns (noisy, clean)."""
    clean = np.zeros((n, n))
    clean[:, n // 2:] = 1.0
    noisy = clean + np.random.default_rng(seed).normal(0.0, sigma, clean.shape)
    return DepthMap(noisy), DepthMap(clean)


@pytest.fixture
def step_fixture():
    return step_edge()
