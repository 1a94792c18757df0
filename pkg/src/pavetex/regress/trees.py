"""Least-squares regression tree.

Splits minimize the children's summed squared error.  Candidate thresholds
are midpoints between consecutive distinct values; ties go to the lowest
feature index, then the lowest threshold, so fitted trees are reproducible.
"""
from __future__ import annotations

import numpy as np

from .. import _kernels
from ..errors import InvalidHyperparameter

LEAF = -1


class RegressionTree:
    def __init__(self, max_depth=None, min_samples_split=2, min_samples_leaf=1,
                 max_features=None, rng=None):
        if max_depth is not None and max_depth < 1:
            raise InvalidHyperparameter("max_depth must be >= 1")
        if min_samples_leaf < 1 or min_samples_split < 2:
            raise InvalidHyperparameter("min_samples_leaf >= 1 and min_samples_split >= 2 required")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    # -- fitting -------------------------------------------------------------

    def _new_node(self, value):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(value))
        return len(self.value) - 1

    def _features_for_node(self, m):
        if self.max_features is None or self.max_features >= m:
            return list(range(m))
        return sorted(int(f) for f in self.rng.choice(m, size=self.max_features, replace=False))

    def fit(self, X, y, sample_idx=None):
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
            raise ValueError("X must be (n, m) with n == len(y) > 0")
        if sample_idx is None:
            sample_idx = np.arange(len(y))
        sample_idx = np.asarray(sample_idx, dtype=np.intp)
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        m = X.shape[1]
        root = self._new_node(y[sample_idx].mean())
        stack = [(root, sample_idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            if len(idx) < self.min_samples_split:
                continue
            yy = y[idx]
            if np.all(yy == yy[0]):
                continue
            f, thr, _ = _kernels.best_split(X, y, idx, self._features_for_node(m),
                                            self.min_samples_leaf)
            if f < 0:
                continue
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            self.feature[node] = f
            self.threshold[node] = thr
            left = self._new_node(y[li].mean())
            right = self._new_node(y[ri].mean())
            self.left[node], self.right[node] = left, right
            # right pushed first so the left subtree is expanded first
            stack.append((right, ri, depth + 1))
            stack.append((left, li, depth + 1))
        return self

    # -- inference -----------------------------------------------------------

    def apply(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        feature = np.array(self.feature)
        threshold = np.array(self.threshold)
        left = np.array(self.left)
        right = np.array(self.right)
        nodes = np.zeros(len(X), dtype=np.intp)
        active = feature[nodes] != LEAF
        while active.any():
            cur = nodes[active]
            rows = np.nonzero(active)[0]
            goes_left = X[rows, feature[cur]] <= threshold[cur]
            nodes[rows] = np.where(goes_left, left[cur], right[cur])
            active = feature[nodes] != LEAF
        return nodes

    def predict(self, X) -> np.ndarray:
        return np.array(self.value)[self.apply(X)]

    @property
    def node_count(self) -> int:
        return len(self.value)

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] != LEAF:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    # -- serialization -------------------------------------------------------

    def to_dict(self, node=0):
        if self.feature[node] == LEAF:
            return {"value": self.value[node]}
        return {
            "feature": self.feature[node],
            "threshold": self.threshold[node],
            "value": self.value[node],
            "left": self.to_dict(self.left[node]),
            "right": self.to_dict(self.right[node]),
        }

    @classmethod
    def from_dict(cls, record):
        tree = cls()
        stack = [(record, None, None)]
        while stack:
            rec, parent, side = stack.pop()
            node = tree._new_node(rec["value"])
            if parent is not None:
                (tree.left if side == "left" else tree.right)[parent] = node
            if "feature" in rec:
                tree.feature[node] = int(rec["feature"])
                tree.threshold[node] = float(rec["threshold"])
                stack.append((rec["right"], node, "right"))
                stack.append((rec["left"], node, "left"))
        return tree
