"""Versioned JSON model artifacts: scaler + fitted model + metadata."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import FeatureMismatch, ParseError, VersionMismatch
from .dataset import ALL_FEATURES, Scaler
from .ensemble import MODEL_CLASSES, ModelSpec

SCHEMA_VERSION = "1.0"


def _major(version: str) -> int:
    try:
        return int(str(version).split(".")[0])
    except ValueError as exc:
        raise VersionMismatch(f"unreadable schema_version {version!r}") from exc


def check_version(version) -> None:
    if version is None or _major(version) != _major(SCHEMA_VERSION):
        raise VersionMismatch(f"artifact schema_version {version!r} is incompatible with "
                              f"supported {SCHEMA_VERSION}")


@dataclass
class ModelArtifact:
    """A fitted model together with the scaler and feature order it expects."""

    spec: ModelSpec
    scaler: Scaler
    model: object
    seed: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def feature_names(self) -> tuple:
        return self.scaler.feature_names

    def predict_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.feature_names):
            raise FeatureMismatch(f"model expects {len(self.feature_names)} feature column(s), "
                                  f"got {X.shape[1]}")
        return self.model.predict(self.scaler.transform(X))

    def predict_rows(self, rows) -> np.ndarray:
        """Predict from mappings of feature name -> value (case-insensitive keys)."""
        X = []
        for i, row in enumerate(rows):
            lower = {str(k).upper(): v for k, v in row.items()}
            missing = [n for n in self.feature_names if lower.get(n) in (None, "")]
            if missing:
                raise FeatureMismatch(f"row {i}: missing feature(s) {', '.join(missing)}")
            X.append([float(lower[n]) for n in self.feature_names])
        if not X:
            return np.empty(0)
        return self.predict_matrix(X)

    def predict_dataset(self, ds) -> np.ndarray:
        return self.predict_matrix(ds.X(self.feature_names))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.spec.kind,
            "spec": self.spec.to_dict(),
            "seed": self.seed,
            "feature_names": list(self.feature_names),
            "scaler": self.scaler.to_dict(),
            "model": self.model.to_dict(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d):
        check_version(d.get("schema_version"))
        try:
            spec = ModelSpec.from_dict(d["spec"])
            scaler = Scaler.from_dict(d["scaler"])
            model = MODEL_CLASSES[spec.kind].from_dict(d["model"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed model artifact: {exc}") from exc
        if any(n not in ALL_FEATURES for n in scaler.feature_names):
            raise FeatureMismatch(f"artifact names unknown features {scaler.feature_names}")
        return cls(spec, scaler, model, d.get("seed", 0), d.get("metadata", {}))


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def save_artifact(artifact: ModelArtifact, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(artifact.to_dict()))


def load_artifact(path) -> ModelArtifact:
    with open(path, encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return ModelArtifact.from_dict(d)
