"""Texture features from a conditioned depth map.

* concavity ratio ``P`` -- share of pixels deeper than a fixed threshold;
* maximum particle size ``D`` -- largest enclosing-circle diameter over the
  image width;
* aggregate voids ``K`` -- per-particle largest gap to an adjacent particle,
  summed and divided by the image width, in percent.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import (EmptyParticleSet, InvalidWindow, ParseError, ShapeMismatch,
                     ThresholdOutOfRange, TooFewParticles)
from .geometry import adjacency_pairs, min_enclosing_circle, pixel_hull_candidates
from .gridio import DepthMap

DEFAULT_THRESHOLD = 0.35


@dataclass(frozen=True, eq=False)
class BinaryMask:
    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError("mask must be 2-D")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]

    @property
    def shape(self):
        return self.bits.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Particle:
    label: int
    pixels: np.ndarray  # (n, 2) array of (x, y)
    circle: tuple[float, float, float]

    @property
    def area(self) -> int:
        return len(self.pixels)

    @property
    def radius(self) -> float:
        return self.circle[2]


@dataclass(frozen=True, eq=False)
class ParticleSet:
    particles: list = field(default_factory=list)
    source_width: int = 0
    labels: np.ndarray | None = None

    def __len__(self):
        return len(self.particles)

    def __iter__(self):
        return iter(self.particles)

    def circles(self) -> np.ndarray:
        return np.array([p.circle for p in self.particles], dtype=float).reshape(-1, 3)


@dataclass(frozen=True)
class FeatureVector:
    p: float
    d: float
    k: float

    def as_dict(self):
        return {"p": self.p, "d": self.d, "k": self.k}


@dataclass(frozen=True)
class BinarizeConfig:
    window: int = 31
    k_bias: float = 0.1
    fill_holes: bool = True

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidWindow(f"binarize window must be odd and >= 3, got {self.window}")
        if not 0.0 <= self.k_bias <= 1.0:
            raise ValueError(f"k_bias must lie in [0, 1], got {self.k_bias}")


@dataclass(frozen=True)
class WatershedConfig:
    min_separation: int = 9
    marker_threshold: float = 0.3
    min_area: int = 25


@dataclass(frozen=True)
class FeatureConfig:
    threshold: float = DEFAULT_THRESHOLD
    binarize: BinarizeConfig = BinarizeConfig()
    watershed: WatershedConfig = WatershedConfig()


# -- concavity ---------------------------------------------------------------

def threshold_segment(dmap: DepthMap, t: float = DEFAULT_THRESHOLD) -> BinaryMask:
    """Concave (far, deep) pixels: normalized depth strictly above ``t``."""
    if not 0.0 < t < 1.0:
        raise ThresholdOutOfRange(f"threshold must lie in (0, 1), got {t}")
    return BinaryMask(dmap.values > t)


def iou(a: BinaryMask, b: BinaryMask) -> float:
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    union = np.count_nonzero(a.bits | b.bits)
    if union == 0:
        return 1.0
    return np.count_nonzero(a.bits & b.bits) / union


def concavity_ratio(mask: BinaryMask) -> float:
    return mask.count() / (mask.width * mask.height)


# -- particle segmentation ---------------------------------------------------

def local_adaptive_binarize(dmap: DepthMap, cfg: BinarizeConfig = BinarizeConfig()) -> BinaryMask:
    """Particle mask from a local-mean threshold.

    ``T = m [1 + k (delta / (1 - delta) - 1)]`` with ``m`` the replicate-padded
    box mean and ``delta = I - m``; particles are the near-camera pixels with
    ``I < T``.  Pixels with ``delta >= 1`` are background.
    """
    if cfg.window > min(dmap.shape):
        raise InvalidWindow(f"binarize window {cfg.window} exceeds map size")
    img = dmap.values
    m = ndimage.uniform_filter(img, size=cfg.window, mode="nearest")
    delta = img - m
    valid = delta < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(valid, delta / (1.0 - delta), 0.0)
    thresh = m * (1.0 + cfg.k_bias * (ratio - 1.0))
    fg = valid & (img < thresh)
    if cfg.fill_holes:
        fg = ndimage.binary_fill_holes(fg)
    return BinaryMask(fg)


def find_markers(edm: np.ndarray, components: np.ndarray, n_components: int,
                 cfg: WatershedConfig) -> np.ndarray:
    """Seed labels at EDM peaks, at least ``min_separation`` apart.

    A peak must equal the maximum of its ``(2s+1)^2`` neighbourhood and reach
    ``marker_threshold`` times its component's EDM maximum.  Peaks are accepted
    greedily in descending EDM order with ``(y, x)`` tie-break; a component
    that ends up without one is seeded at its first maximal pixel.
    """
    markers = np.zeros(edm.shape, dtype=np.int32)
    if n_components == 0:
        return markers
    s = int(cfg.min_separation)
    index = np.arange(1, n_components + 1)
    comp_max = np.asarray(ndimage.maximum(edm, components, index), dtype=float)
    local_max = ndimage.maximum_filter(edm, size=2 * s + 1, mode="constant", cval=0.0)
    floor = np.zeros(n_components + 1)
    floor[1:] = cfg.marker_threshold * comp_max
    cand = (components > 0) & (edm == local_max) & (edm >= floor[components]) & (edm > 0)
    ys, xs = np.nonzero(cand)
    order = np.lexsort((xs, ys, -edm[ys, xs]))
    accepted: dict[int, list[tuple[int, int]]] = {}
    seeds = []
    s2 = s * s
    for i in order:
        y, x = int(ys[i]), int(xs[i])
        comp = int(components[y, x])
        near = accepted.setdefault(comp, [])
        if any((y - py) ** 2 + (x - px) ** 2 < s2 for py, px in near):
            continue
        near.append((y, x))
        seeds.append((y, x))
    missing = [c for c in index if c not in accepted]
    if missing:
        for c in missing:
            cy, cx = np.nonzero((components == c) & (edm == comp_max[c - 1]))
            seeds.append((int(cy[0]), int(cx[0])))
    seeds.sort()
    for lab, (y, x) in enumerate(seeds, start=1):
        markers[y, x] = lab
    return markers


def watershed_split(mask: BinaryMask, cfg: WatershedConfig = WatershedConfig()) -> ParticleSet:
    """Separate touching particles by flooding the inverted distance map."""
    bits = mask.bits
    if not bits.any():
        return ParticleSet([], mask.width, np.zeros(bits.shape, dtype=np.int32))
    edm = ndimage.distance_transform_edt(bits)
    components, n_comp = ndimage.label(bits)
    markers = find_markers(edm, components, n_comp, cfg)
    labels = _kernels.watershed_flood(-edm, markers, bits.view(np.uint8))
    return particles_from_labels(labels, mask.width, cfg.min_area)


def particles_from_labels(labels: np.ndarray, source_width: int, min_area: int = 1) -> ParticleSet:
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    sorted_labels = flat[order]
    starts = np.searchsorted(sorted_labels, np.arange(1, sorted_labels[-1] + 2 if len(flat) else 1))
    w = labels.shape[1]
    kept = np.zeros_like(labels)
    particles = []
    for lab in range(1, len(starts)):
        idx = order[starts[lab - 1]:starts[lab]]
        if len(idx) == 0 or len(idx) < min_area:
            continue
        ys, xs = np.divmod(idx, w)
        new_label = len(particles) + 1
        kept.ravel()[idx] = new_label
        hull = pixel_hull_candidates(xs, ys)
        particles.append(Particle(new_label, np.column_stack([xs, ys]),
                                  min_enclosing_circle(hull)))
    return ParticleSet(particles, source_width, kept)


def max_particle_size(pset: ParticleSet) -> float:
    if len(pset) == 0:
        raise EmptyParticleSet("no particles to size")
    return 2.0 * max(p.radius for p in pset) / pset.source_width


def void_gaps(circles: np.ndarray, pairs) -> np.ndarray:
    """Largest non-negative gap from each circle to any adjacent circle."""
    kmax = np.zeros(len(circles))
    for i, j in pairs:
        gap = np.hypot(circles[i, 0] - circles[j, 0], circles[i, 1] - circles[j, 1])
        gap = max(0.0, gap - circles[i, 2] - circles[j, 2])
        kmax[i] = max(kmax[i], gap)
        kmax[j] = max(kmax[j], gap)
    return kmax


def unoccluded_pairs(circles: np.ndarray, pairs) -> set[tuple[int, int]]:
    """Drop pairs whose connecting segment passes through a third circle.

    Near-collinear centres on the hull give Delaunay slivers that link
    particles with another particle in between; those are not neighbours.
    """
    circles = np.asarray(circles, dtype=float)
    centers, radii = circles[:, :2], circles[:, 2]
    keep = set()
    for i, j in sorted(pairs):
        a, b = centers[i], centers[j]
        ab = b - a
        length_sq = float(ab @ ab)
        if length_sq == 0.0:
            keep.add((i, j))
            continue
        t = (centers - a) @ ab / length_sq
        inside = (t > 0.0) & (t < 1.0)
        inside[[i, j]] = False
        if inside.any():
            foot = a + np.outer(t[inside], ab)
            dist = np.hypot(*(centers[inside] - foot).T)
            if np.any(dist < radii[inside]):
                continue
        keep.add((i, j))
    return keep


def aggregate_voids(pset: ParticleSet) -> float:
    """Sum of per-particle maximal gaps over the image width, in percent.

    Neighbours are Delaunay edges of the circle centres that do not pass
    through another particle's circle.
    """
    if len(pset) < 2:
        raise TooFewParticles(f"aggregate voids need >= 2 particles, got {len(pset)}")
    circles = pset.circles()
    pairs = unoccluded_pairs(circles, adjacency_pairs(circles[:, :2]))
    kmax = void_gaps(circles, pairs)
    return 100.0 * float(kmax.sum()) / pset.source_width


# -- composite ---------------------------------------------------------------

def segment_particles(dmap: DepthMap, cfg: FeatureConfig = FeatureConfig()):
    mask = local_adaptive_binarize(dmap, cfg.binarize)
    return mask, watershed_split(mask, cfg.watershed)


def extract_features(dmap: DepthMap, cfg: FeatureConfig = FeatureConfig()) -> FeatureVector:
    """P, D and K from a conditioned (normalized, filtered, corrected) map."""
    p = concavity_ratio(threshold_segment(dmap, cfg.threshold))
    _, pset = segment_particles(dmap, cfg)
    if len(pset) == 0:
        raise EmptyParticleSet("binarization found no particles")
    return FeatureVector(p, max_particle_size(pset), aggregate_voids(pset))


# -- export ------------------------------------------------------------------

def write_pgm(mask: BinaryMask, path) -> None:
    data = np.where(mask.bits, 255, 0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_pgm(path) -> BinaryMask:
    with open(path, "rb") as f:
        raw = f.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (P5)")
    width, height, maxval = (int(t) for t in tokens[1:])
    data = np.frombuffer(raw[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    if data.size != width * height or maxval > 255:
        raise ParseError(f"{path}: truncated or 16-bit PGM")
    return BinaryMask(data.reshape(height, width) > 0)


def write_particles_csv(pset: ParticleSet, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["label", "cx", "cy", "radius", "area"])
        for p in pset:
            cx, cy, r = p.circle
            writer.writerow([p.label, repr(cx), repr(cy), repr(r), p.area])
