"""Depth map -> conditioned map -> features, driven by one serializable config."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, is_dataclass

from .correct import RansacConfig, ransac_cubic_fit, ransac_plane_fit, subtract_fit
from .denoise import FilterConfig, NoiseModel, adaptive_local_filter, estimate_noise_variance
from .errors import PavetexError, StageError
from .features import (BinarizeConfig, BinaryMask, FeatureConfig, FeatureVector, ParticleSet,
                       WatershedConfig, aggregate_voids, concavity_ratio, max_particle_size,
                       segment_particles, threshold_segment)
from .gridio import DepthMap, normalize
from .regress.dataset import MODEL_SUBSETS, parse_feature_subset
from .regress.ensemble import ModelSpec

CORRECTION_MODES = ("plane", "surface")
AUTO_THRESHOLD_SIGMAS = 2.5
MIN_AUTO_THRESHOLD = 1e-6


@dataclass(frozen=True)
class CorrectionConfig:
    mode: str = "plane"
    iterations: int = 500
    threshold: float | None = None  # None: 2.5 x estimated noise sigma
    min_inlier_fraction: float = 0.5

    def __post_init__(self):
        if self.mode not in CORRECTION_MODES:
            raise ValueError(f"correction mode must be one of {CORRECTION_MODES}, got {self.mode!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.threshold is not None and not self.threshold > 0:
            raise ValueError("ransac threshold must be > 0")


@dataclass(frozen=True)
class PipelineConfig:
    filter: FilterConfig = FilterConfig()
    correction: CorrectionConfig = CorrectionConfig()
    features: FeatureConfig = FeatureConfig()
    model: ModelSpec = ModelSpec()
    feature_subset: str = "P+D"
    holdout_fraction: float = 0.25
    cv_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        parse_feature_subset(self.feature_subset, MODEL_SUBSETS)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return _build(cls, d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        return cls.from_dict(json.loads(text))

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        """Apply ``{"a.b.c": value}`` overrides; ``None`` values are ignored."""
        d = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            node = d
            parts = key.split(".")
            for p in parts[:-1]:
                node = node[p]
            if parts[-1] not in node:
                raise KeyError(f"unknown config key {key!r}")
            node[parts[-1]] = value
        return PipelineConfig.from_dict(d)


def _build(cls, d):
    """Instantiate a (possibly nested) frozen dataclass from a plain dict."""
    if not isinstance(d, dict):
        raise TypeError(f"expected an object for {cls.__name__}, got {type(d).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = set(d) - set(known)
    if unknown:
        raise KeyError(f"unknown {cls.__name__} key(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    defaults = cls()
    for name, value in d.items():
        default = getattr(defaults, name)
        kwargs[name] = _build(type(default), value) if is_dataclass(default) else value
    return cls(**kwargs)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as f:
        return PipelineConfig.from_json(f.read())


@dataclass
class PipelineResult:
    """Features plus every intermediate product of one map's run."""

    features: FeatureVector
    normalized: DepthMap
    filtered: DepthMap
    corrected: DepthMap
    noise: NoiseModel
    trend: object
    ransac_threshold: float
    concave_mask: BinaryMask
    particle_mask: BinaryMask
    particles: ParticleSet = field(repr=False)

    def summary(self) -> dict:
        return {
            "features": self.features.as_dict(),
            "noise_variance": self.noise.sigma_eta_sq,
            "ransac_threshold": self.ransac_threshold,
            "trend": self.trend.to_dict(),
            "n_particles": len(self.particles),
        }


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except PavetexError as exc:
        raise StageError(name, exc) from exc
    except ValueError as exc:
        raise StageError(name, exc) from exc


def ransac_config(cfg: PipelineConfig, noise: NoiseModel) -> RansacConfig:
    thr = cfg.correction.threshold
    if thr is None:
        thr = max(AUTO_THRESHOLD_SIGMAS * math.sqrt(noise.sigma_eta_sq), MIN_AUTO_THRESHOLD)
    return RansacConfig(cfg.correction.iterations, thr, cfg.correction.min_inlier_fraction, cfg.seed)


def condition(dmap: DepthMap, cfg: PipelineConfig = PipelineConfig()):
    """normalize -> adaptive filter -> RANSAC detrend -> renormalize.

    Returns ``(normalized, filtered, corrected, noise, trend, threshold)``.
    """
    norm = _stage("normalize", normalize, dmap)
    noise = _stage("denoise", estimate_noise_variance, norm)
    filtered = _stage("denoise", adaptive_local_filter, norm, cfg.filter, noise)
    rcfg = _stage("correct", ransac_config, cfg, noise)
    fit = ransac_plane_fit if cfg.correction.mode == "plane" else ransac_cubic_fit
    trend = _stage("correct", fit, filtered, rcfg)
    detrended = _stage("correct", subtract_fit, filtered, trend)
    corrected = _stage("correct", normalize, detrended)
    return norm, filtered, corrected, noise, trend, rcfg.inlier_threshold


def run_features(dmap: DepthMap, cfg: PipelineConfig = PipelineConfig()) -> PipelineResult:
    norm, filtered, corrected, noise, trend, thr = condition(dmap, cfg)
    fcfg = cfg.features
    concave = _stage("features", threshold_segment, corrected, fcfg.threshold)
    particle_mask, pset = _stage("segment", segment_particles, corrected, fcfg)
    p = concavity_ratio(concave)
    d = _stage("features", max_particle_size, pset)
    k = _stage("features", aggregate_voids, pset)
    return PipelineResult(FeatureVector(p, d, k), norm, filtered, corrected, noise, trend, thr,
                          concave, particle_mask, pset)


__all__ = [
    "BinarizeConfig", "CorrectionConfig", "FeatureConfig", "FilterConfig", "PipelineConfig",
    "PipelineResult", "WatershedConfig", "condition", "load_config", "ransac_config",
    "run_features",
]
