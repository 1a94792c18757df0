"""Tilt and offset removal by RANSAC plane / cubic-surface fitting."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DegenerateInput, NoConsensus, TooFewSamples
from .gridio import DepthMap, Profile

# monomial exponents (px, py) in the coefficient order a..j:
# a + b x + c y + d x^2 + e x y + f y^2 + g x^3 + h x^2 y + i x y^2 + j y^3
CUBIC_TERMS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3))

MAX_CONSENSUS_POINTS = 512 * 512


@dataclass(frozen=True)
class PlaneModel:
    a: float
    b: float
    c: float

    def __call__(self, x, y):
        return self.a * np.asarray(x, dtype=float) + self.b * np.asarray(y, dtype=float) + self.c

    def to_dict(self):
        return {"kind": "plane", "coefficients": [self.a, self.b, self.c]}


@dataclass(frozen=True)
class CubicSurfaceModel:
    coefficients: tuple

    def __post_init__(self):
        coef = tuple(float(c) for c in self.coefficients)
        if len(coef) != 10:
            raise ValueError("cubic surface needs 10 coefficients")
        object.__setattr__(self, "coefficients", coef)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for c, (px, py) in zip(self.coefficients, CUBIC_TERMS):
            out = out + c * x**px * y**py
        return out

    def to_dict(self):
        return {"kind": "surface", "coefficients": list(self.coefficients)}


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 500
    inlier_threshold: float = 0.01
    min_inlier_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.inlier_threshold > 0:
            raise ValueError("inlier_threshold must be > 0")
        if not 0 < self.min_inlier_fraction <= 1:
            raise ValueError("min_inlier_fraction must be in (0, 1]")


def _candidate_points(dmap: DepthMap):
    """Pixel coordinates and depths, uniformly strided when the map is large."""
    h, w = dmap.shape
    stride = 1
    while (-(-h // stride)) * (-(-w // stride)) > MAX_CONSENSUS_POINTS:
        stride += 1
    ys, xs = np.mgrid[0:h:stride, 0:w:stride]
    z = dmap.values[::stride, ::stride]
    return xs.ravel().astype(float), ys.ravel().astype(float), z.ravel().astype(float)


def _ransac(design: np.ndarray, z: np.ndarray, sample_size: int, cfg: RansacConfig):
    """Generic RANSAC over a linear model ``z ~ design @ coef``.

    Returns the least-squares coefficients refit on the winning consensus set.
    """
    n = len(z)
    if n < sample_size:
        raise DegenerateInput(f"need at least {sample_size} points, got {n}")
    rng = np.random.default_rng(cfg.seed)
    best_count = -1
    best_sum = np.inf
    best_mask = None
    for _ in range(cfg.iterations):
        sample = rng.choice(n, size=sample_size, replace=False)
        a = design[sample]
        if np.linalg.matrix_rank(a) < sample_size:
            continue
        coef = np.linalg.solve(a, z[sample])
        resid = np.abs(z - design @ coef)
        inliers = resid <= cfg.inlier_threshold
        count = int(np.count_nonzero(inliers))
        if count < best_count:
            continue
        rsum = float(resid[inliers].sum())
        if count > best_count or rsum < best_sum:
            best_count, best_sum, best_mask = count, rsum, inliers
    if best_mask is None:
        raise DegenerateInput("every sampled subset was degenerate")
    if best_count / n < cfg.min_inlier_fraction:
        raise NoConsensus(
            f"best inlier fraction {best_count / n:.4f} < {cfg.min_inlier_fraction}"
        )
    coef, *_ = np.linalg.lstsq(design[best_mask], z[best_mask], rcond=None)
    return coef


def ransac_plane_fit(dmap: DepthMap, cfg: RansacConfig = RansacConfig()) -> PlaneModel:
    x, y, z = _candidate_points(dmap)
    design = np.column_stack([x, y, np.ones_like(x)])
    a, b, c = _ransac(design, z, 3, cfg)
    return PlaneModel(float(a), float(b), float(c))


def _cubic_design(u, v):
    return np.column_stack([u**px * v**py for px, py in CUBIC_TERMS])


def _scaling(n):
    centre = (n - 1) / 2.0
    half = centre if centre > 0 else 1.0
    return centre, half


def ransac_cubic_fit(dmap: DepthMap, cfg: RansacConfig = RansacConfig()) -> CubicSurfaceModel:
    """Cubic surface fit; coordinates are mapped to [-1, 1] for conditioning."""
    x, y, z = _candidate_points(dmap)
    cx, sx = _scaling(dmap.width)
    cy, sy = _scaling(dmap.height)
    u = (x - cx) / sx
    v = (y - cy) / sy
    coef_uv = _ransac(_cubic_design(u, v), z, 10, cfg)
    return CubicSurfaceModel(_unscale_cubic(coef_uv, cx, sx, cy, sy))


def _unscale_cubic(coef_uv, cx, sx, cy, sy):
    """Re-express sum c_pq u^p v^q with u=(x-cx)/sx, v=(y-cy)/sy in powers of x, y."""
    out = dict.fromkeys(CUBIC_TERMS, 0.0)
    for c, (p, q) in zip(coef_uv, CUBIC_TERMS):
        scale = c / (sx**p * sy**q)
        for i in range(p + 1):
            for j in range(q + 1):
                term = comb(p, i) * (-cx) ** (p - i) * comb(q, j) * (-cy) ** (q - j)
                out[(i, j)] += scale * term
    return tuple(out[t] for t in CUBIC_TERMS)


def subtract_fit(dmap: DepthMap, model) -> DepthMap:
    ys, xs = np.mgrid[0:dmap.height, 0:dmap.width]
    return DepthMap(dmap.values - model(xs, ys))


def profile_slope(profile: Profile) -> float:
    """Ordinary least-squares slope of depth against column index."""
    x = np.asarray(profile.x, dtype=float)
    z = np.asarray(profile.z, dtype=float)
    if len(x) < 2:
        raise TooFewSamples("profile slope needs at least 2 samples")
    xc = x - x.mean()
    return float(np.dot(xc, z - z.mean()) / np.dot(xc, xc))
