"""Synthetic pavement textures with planted ground truth.

Aggregate tops are discs at ``convex_depth`` (near the camera) on a
``concave_depth`` background, tilted by a plane and perturbed by Gaussian
noise.  The oracle MTD mimics a sand patch: sand fills everything below the
aggregate tops, so the label is the mean depth below the fill level.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .correct import PlaneModel
from .errors import PlacementFailure
from .gridio import DepthMap

FILL_PERCENTILE = 99.5
ATTEMPTS_PER_DISC = 200


@dataclass(frozen=True)
class SynthSpec:
    width: int = 256
    height: int = 256
    n_particles: int = 20
    radius_range: tuple = (6.0, 14.0)
    tilt: tuple = (0.0, 0.0)
    noise_sigma: float = 0.0
    concave_depth: float = 1.0
    convex_depth: float = 0.0
    seed: int = 0
    min_gap: float = 2.0
    unit_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "radius_range", tuple(float(r) for r in self.radius_range))
        object.__setattr__(self, "tilt", tuple(float(t) for t in self.tilt))
        lo, hi = self.radius_range
        if not 0 < lo <= hi or 2 * hi + 1 > min(self.width, self.height):
            raise ValueError(f"radius_range {self.radius_range} does not fit the grid")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not self.concave_depth > self.convex_depth:
            raise ValueError("concave_depth must exceed convex_depth")

    def to_dict(self):
        d = asdict(self)
        d["radius_range"] = list(self.radius_range)
        d["tilt"] = list(self.tilt)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    clean_map: DepthMap
    plane: PlaneModel
    circles: list = field(default_factory=list)
    concave_fraction: float = 1.0
    unit_factor: float = 1.0

    @property
    def oracle_mtd(self) -> float:
        return oracle_mtd(self)

    def to_dict(self):
        return {
            "width": self.clean_map.width,
            "height": self.clean_map.height,
            "plane": [self.plane.a, self.plane.b, self.plane.c],
            "circles": [list(c) for c in self.circles],
            "concave_fraction": self.concave_fraction,
            "unit_factor": self.unit_factor,
            "oracle_mtd": self.oracle_mtd,
        }


def place_discs(spec: SynthSpec, rng: np.random.Generator) -> list[tuple[float, float, float]]:
    """Rejection-sample non-overlapping discs fully inside the grid."""
    circles: list[tuple[float, float, float]] = []
    lo, hi = spec.radius_range
    budget = ATTEMPTS_PER_DISC * spec.n_particles
    attempts = 0
    while len(circles) < spec.n_particles:
        if attempts >= budget:
            raise PlacementFailure(
                f"placed {len(circles)} of {spec.n_particles} discs in {budget} attempts"
            )
        attempts += 1
        r = rng.uniform(lo, hi)
        cx = rng.uniform(r, spec.width - 1 - r)
        cy = rng.uniform(r, spec.height - 1 - r)
        if all(math.hypot(cx - x, cy - y) >= r + rr + spec.min_gap for x, y, rr in circles):
            circles.append((float(cx), float(cy), float(r)))
    return circles


def disc_mask(width: int, height: int, circles) -> np.ndarray:
    """Pixels whose centres lie within any circle."""
    mask = np.zeros((height, width), dtype=bool)
    for cx, cy, r in circles:
        y0, y1 = max(0, int(math.floor(cy - r))), min(height, int(math.ceil(cy + r)) + 1)
        x0, x1 = max(0, int(math.floor(cx - r))), min(width, int(math.ceil(cx + r)) + 1)
        yy, xx = np.mgrid[y0:y1, x0:x1]
        mask[y0:y1, x0:x1] |= (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    return mask


def render_texture(spec: SynthSpec, circles, rng: np.random.Generator | None = None):
    """Render given discs into a tilted, noisy depth map plus its ground truth."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    w, h = spec.width, spec.height
    discs = disc_mask(w, h, circles)
    clean = np.where(discs, spec.convex_depth, spec.concave_depth).astype(float)
    plane = PlaneModel(spec.tilt[0], spec.tilt[1], 0.0)
    ys, xs = np.mgrid[0:h, 0:w]
    noisy = clean + plane(xs, ys)
    if spec.noise_sigma > 0:
        noisy = noisy + rng.normal(0.0, spec.noise_sigma, size=clean.shape)
    covered = sum(math.pi * r * r for _, _, r in circles)
    truth = GroundTruth(
        clean_map=DepthMap(clean),
        plane=plane,
        circles=[tuple(c) for c in circles],
        concave_fraction=1.0 - covered / (w * h),
        unit_factor=spec.unit_factor,
    )
    return DepthMap(noisy), truth


def generate_texture(spec: SynthSpec):
    rng = np.random.default_rng(spec.seed)
    circles = place_discs(spec, rng)
    return render_texture(spec, circles, rng)


def oracle_mtd(truth: GroundTruth) -> float:
    """Mean depth below the sand fill level, times the unit factor.

    The fill level sits on the aggregate tops: the 99.5th percentile of
    surface height, i.e. the 0.5th percentile of depth.
    """
    z = truth.clean_map.values
    fill = np.percentile(z, 100.0 - FILL_PERCENTILE)
    return float(np.mean(np.maximum(z - fill, 0.0)) * truth.unit_factor)


# -- datasets ----------------------------------------------------------------

@dataclass(frozen=True)
class FamilyMember:
    """One stratum: a base spec plus the per-sample variation range."""

    name: str
    base: SynthSpec
    n_particles_range: tuple = (10, 30)
    tilt_range: float = 0.0

    def to_dict(self):
        return {
            "name": self.name,
            "base": self.base.to_dict(),
            "n_particles_range": list(self.n_particles_range),
            "tilt_range": self.tilt_range,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d["name"],
            base=SynthSpec.from_dict(d["base"]),
            n_particles_range=tuple(d.get("n_particles_range", (10, 30))),
            tilt_range=float(d.get("tilt_range", 0.0)),
        )


def default_family(width: int = 192, height: int = 192) -> list[FamilyMember]:
    """Four strata loosely shaped after AC-13, AC-16, SMA-13 and OGFC-16.

    Strata differ in aggregate size and packing density; all share one depth
    scale so labels stay comparable across strata.
    """
    common = dict(width=width, height=height, noise_sigma=0.01, convex_depth=0.0,
                  concave_depth=1.0, unit_factor=2.0)
    fine = SynthSpec(radius_range=(5.0, 9.0), **common)
    coarse = SynthSpec(radius_range=(7.0, 12.0), **common)
    return [
        FamilyMember("AC-13", fine, (40, 90), 0.002),
        FamilyMember("AC-16", coarse, (20, 50), 0.002),
        FamilyMember("SMA-13", fine, (60, 100), 0.002),
        FamilyMember("OGFC-16", coarse, (10, 30), 0.002),
    ]


def sample_spec(member: FamilyMember, seed: int) -> SynthSpec:
    rng = np.random.default_rng(seed)
    lo, hi = member.n_particles_range
    n = int(rng.integers(lo, hi + 1))
    tilt = tuple(rng.uniform(-member.tilt_range, member.tilt_range, 2)) if member.tilt_range else (0.0, 0.0)
    return replace(member.base, n_particles=n, tilt=tilt, seed=seed)


def sample_seeds(seed: int, n: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1, dtype=np.uint64)[0] >> 1) for s in ss.spawn(n)]


def corpus_plan(n_samples: int, family: list[FamilyMember], seed: int):
    """(sample id, member, spec) triples; samples split evenly across members in order."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    seeds = sample_seeds(seed, n_samples)
    per, extra = divmod(n_samples, len(family))
    plan = []
    i = 0
    for m_idx, member in enumerate(family):
        count = per + (1 if m_idx < extra else 0)
        for j in range(count):
            plan.append((f"{member.name}-{j + 1}", member, sample_spec(member, seeds[i])))
            i += 1
    return plan


def generate_dataset(n_samples: int, family: list[FamilyMember] | None = None, seed: int = 0,
                     config=None):
    """Run the full feature pipeline over a generated corpus, labelled by the oracle MTD."""
    from .pipeline import PipelineConfig, run_features
    from .regress import Dataset, LabeledSample

    family = family or default_family()
    config = config or PipelineConfig()
    samples = []
    for sid, member, spec in corpus_plan(n_samples, family, seed):
        dmap, truth = generate_texture(spec)
        fv = run_features(dmap, config).features
        samples.append(LabeledSample(sid, member.name, fv, oracle_mtd(truth)))
    return Dataset.from_samples(samples)


def linear_feature_dataset(n_per_stratum: int = 40, seed: int = 0, noise: float = 0.03,
                           coef=(0.5, 2.0, 3.0, 0.0)):
    """Feature-space dataset with ``mtd = c0 + c1 P + c2 D + c3 K + noise``.

    Feature ranges per stratum follow the magnitudes of published field
    measurements (P 0.4-0.9, D 0.12-0.21, K 1-3.3 %).
    """
    from .features import FeatureVector
    from .regress import Dataset, LabeledSample

    strata = {
        "AC-13": ((0.40, 0.55), (0.12, 0.16), (1.1, 1.5)),
        "AC-16": ((0.65, 0.80), (0.16, 0.21), (2.0, 2.4)),
        "SMA-13": ((0.48, 0.62), (0.12, 0.16), (1.7, 2.1)),
        "OGFC-16": ((0.78, 0.90), (0.17, 0.21), (2.8, 3.3)),
    }
    rng = np.random.default_rng(seed)
    samples = []
    for name, (pr, dr, kr) in strata.items():
        for j in range(n_per_stratum):
            p, d, k = rng.uniform(*pr), rng.uniform(*dr), rng.uniform(*kr)
            mtd = coef[0] + coef[1] * p + coef[2] * d + coef[3] * k + rng.normal(0.0, noise)
            samples.append(LabeledSample(f"{name}-{j + 1}", name, FeatureVector(p, d, k), mtd))
    return Dataset.from_samples(samples)
