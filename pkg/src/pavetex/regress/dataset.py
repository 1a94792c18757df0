"""Feature-label samples, CSV I/O, z-score scaling and stratified splitting."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import FeatureMismatch, ParseError, StratumTooSmall, ZeroVariance
from ..features import FeatureVector

ALL_FEATURES = ("P", "D", "K")
MODEL_SUBSETS = ("P+K", "P+D", "K+D", "P+D+K")
CSV_HEADER = ("id", "mixture", "p", "d", "k", "mtd")


def parse_feature_subset(text: str, allowed=None) -> tuple[str, ...]:
    """``"P+D"`` -> ``("P", "D")`` in canonical P, D, K order."""
    names = [t.strip().upper() for t in text.split("+") if t.strip()]
    if not names or any(n not in ALL_FEATURES for n in names) or len(set(names)) != len(names):
        raise FeatureMismatch(f"invalid feature subset {text!r}")
    canon = tuple(n for n in ALL_FEATURES if n in names)
    if allowed is not None:
        allowed_sets = {frozenset(parse_feature_subset(a)) for a in allowed}
        if frozenset(canon) not in allowed_sets:
            raise FeatureMismatch(f"feature subset {text!r} not in {', '.join(allowed)}")
    return canon


def subset_name(names) -> str:
    return "+".join(names)


@dataclass(frozen=True)
class LabeledSample:
    id: str
    mixture: str
    features: FeatureVector
    mtd: float

    def __post_init__(self):
        if not self.mtd > 0:
            raise ValueError(f"sample {self.id}: mtd must be positive, got {self.mtd}")


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple
    feature_names: tuple = ALL_FEATURES

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique")
        if any(n not in ALL_FEATURES for n in self.feature_names):
            raise FeatureMismatch(f"unknown feature names {self.feature_names}")

    @classmethod
    def from_samples(cls, samples, feature_names=ALL_FEATURES):
        return cls(tuple(samples), tuple(feature_names))

    def __len__(self):
        return len(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def mixtures(self) -> list[str]:
        return [s.mixture for s in self.samples]

    @property
    def y(self) -> np.ndarray:
        return np.array([s.mtd for s in self.samples], dtype=float)

    def full_matrix(self) -> np.ndarray:
        return np.array([[s.features.p, s.features.d, s.features.k] for s in self.samples],
                        dtype=float).reshape(-1, 3)

    def X(self, names=None) -> np.ndarray:
        names = self.feature_names if names is None else tuple(names)
        cols = [ALL_FEATURES.index(n) for n in names]
        return self.full_matrix()[:, cols]

    def with_features(self, names) -> "Dataset":
        return Dataset(self.samples, tuple(names))

    def subset(self, indices) -> "Dataset":
        return Dataset(tuple(self.samples[i] for i in indices), self.feature_names)

    def strata(self) -> dict[str, list[int]]:
        """Stratum name -> member indices ordered by sample id; names sorted."""
        groups: dict[str, list[int]] = {}
        for i, s in enumerate(self.samples):
            groups.setdefault(s.mixture, []).append(i)
        return {k: sorted(v, key=lambda i: self.samples[i].id) for k, v in sorted(groups.items())}


def read_dataset(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration as exc:
            raise ParseError(f"{path}: empty dataset file") from exc
        if tuple(header) != CSV_HEADER:
            raise ParseError(f"{path}: expected header {','.join(CSV_HEADER)}, got {','.join(header)}")
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"{path}: line {lineno}: expected 6 fields, got {len(row)}")
            try:
                p, d, k, mtd = (float(v) for v in row[2:])
                samples.append(LabeledSample(row[0].strip(), row[1].strip(), FeatureVector(p, d, k), mtd))
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    return Dataset.from_samples(samples)


def write_dataset(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for s in ds.samples:
            fv = s.features
            writer.writerow([s.id, s.mixture, repr(fv.p), repr(fv.d), repr(fv.k), repr(s.mtd)])


@dataclass(frozen=True)
class Scaler:
    feature_names: tuple
    mean: tuple
    std: tuple

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - np.array(self.mean)) / np.array(self.std)

    def to_dict(self):
        return {"feature_names": list(self.feature_names), "mean": list(self.mean),
                "std": list(self.std)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["feature_names"]), tuple(d["mean"]), tuple(d["std"]))


def zscore_fit_array(X, feature_names) -> Scaler:
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise ValueError("cannot fit a scaler on an empty training set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    bad = [n for n, s in zip(feature_names, std) if not s > 0]
    if bad:
        raise ZeroVariance(f"zero variance in feature(s) {', '.join(bad)}")
    return Scaler(tuple(feature_names), tuple(float(m) for m in mean), tuple(float(s) for s in std))


def zscore_fit(train: Dataset) -> Scaler:
    """Per-feature mean and population standard deviation."""
    return zscore_fit_array(train.X(), train.feature_names)


def zscore_apply(scaler: Scaler, ds: Dataset) -> Dataset:
    """Scaled copy of ``ds``; unscaled features pass through unchanged."""
    full = ds.full_matrix()
    for name, m, s in zip(scaler.feature_names, scaler.mean, scaler.std):
        j = ALL_FEATURES.index(name)
        full[:, j] = (full[:, j] - m) / s
    samples = [LabeledSample(smp.id, smp.mixture, FeatureVector(*row), smp.mtd)
               for smp, row in zip(ds.samples, full.tolist())]
    return Dataset(tuple(samples), ds.feature_names)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(ds: Dataset, holdout_fraction: float, seed: int = 0):
    """Hold out ``round(fraction * size)`` samples from every stratum.

    Membership is a pure function of the sample ids, strata and seed; both
    parts keep the input order.
    """
    if not 0.0 <= holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must lie in [0, 1)")
    if holdout_fraction == 0.0:
        return ds, ds.subset([])
    rng = np.random.default_rng(seed)
    held = set()
    for name, members in ds.strata().items():
        if len(members) < 2:
            raise StratumTooSmall(f"stratum {name!r} has {len(members)} sample(s); need >= 2")
        count = _round_half_up(holdout_fraction * len(members))
        perm = rng.permutation(len(members))
        held.update(members[i] for i in perm[:count])
    train = [i for i in range(len(ds)) if i not in held]
    hold = [i for i in range(len(ds)) if i in held]
    return ds.subset(train), ds.subset(hold)
