"""Compiled and pure-Python kernels must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import ndimage

from pavetex import _core_py, _kernels
from pavetex.synth import disc_mask

BACKENDS = _kernels.available_backends()


def test_backend_reported():
    assert _kernels.BACKEND in BACKENDS


def test_pure_python_env_forces_fallback():
    out = subprocess.run(
        [sys.executable, "-c", "import pavetex; print(pavetex.BACKEND)"],
        env={**os.environ, "PAVETEX_PURE_PYTHON": "1"}, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_watershed_parity():
    rng = np.random.default_rng(0)
    for _ in range(5):
        circles = [(float(x), float(y), float(r)) for x, y, r in
                   zip(rng.uniform(10, 90, 15), rng.uniform(10, 90, 15), rng.uniform(4, 10, 15))]
        bits = disc_mask(100, 100, circles)
        edm = ndimage.distance_transform_edt(bits)
        markers, _ = ndimage.label(edm > 0.8 * ndimage.maximum_filter(edm, 9))
        markers = markers.astype(np.int32)
        a = BACKENDS["cython"].watershed_flood(-edm, markers, bits.view(np.uint8))
        b = BACKENDS["python"].watershed_flood(-edm, markers, bits.view(np.uint8))
        assert np.array_equal(a, b)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_bilateral_parity():
    z = np.random.default_rng(1).uniform(size=(40, 33))
    a = BACKENDS["cython"].bilateral(z, 5, 2.0, 0.1)
    b = BACKENDS["python"].bilateral(z, 5, 2.0, 0.1)
    assert np.allclose(a, b, atol=1e-13, rtol=0)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_best_split_parity():
    rng = np.random.default_rng(2)
    for _ in range(30):
        X = np.ascontiguousarray(rng.integers(0, 8, (50, 3)).astype(float))
        y = rng.normal(size=50)
        idx = np.sort(rng.choice(50, 35, replace=False)).astype(np.intp)
        a = BACKENDS["cython"].best_split(X, y, idx, [0, 1, 2], 2)
        b = BACKENDS["python"].best_split(X, y, idx, [0, 1, 2], 2)
        assert a[:2] == b[:2]
        assert a[2] == pytest.approx(b[2], rel=1e-12)


def test_flood_respects_mask_and_connectivity():
    mask = np.zeros((5, 7), np.uint8)
    mask[:, :3] = 1
    mask[:, 4:] = 1
    markers = np.zeros((5, 7), np.int32)
    markers[2, 1] = 1
    out = _core_py.watershed_flood(np.zeros((5, 7)), markers, mask)
    assert np.all(out[:, :3] == 1) and np.all(out[:, 3:] == 0)


def test_best_split_no_valid_split():
    X = np.ones((4, 1))
    f, thr, _ = _core_py.best_split(X, np.arange(4.0), np.arange(4, dtype=np.intp), [0], 1)
    assert f < 0
