"""Planar geometry helpers: minimum enclosing circle and particle adjacency."""
from __future__ import annotations

import math
import random

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import EmptySet

_EPS = 1e-12


def _contains(c, p):
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * (1 + _EPS) + _EPS


def _diameter(a, b):
    cx = (a[0] + b[0]) / 2
    cy = (a[1] + b[1]) / 2
    return (cx, cy, max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1])))


def _circumcircle(a, b, c):
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = max(math.hypot(x - p[0], y - p[1]) for p in (a, b, c))
    return (x, y, r)


def _cross(x0, y0, x1, y1, x2, y2):
    return (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)


def _circle_two(points, p, q):
    circ = _diameter(p, q)
    left = right = None
    for r in points:
        if _contains(circ, r):
            continue
        cross = _cross(p[0], p[1], q[0], q[1], r[0], r[1])
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        side = _cross(p[0], p[1], q[0], q[1], c[0], c[1])
        if cross > 0 and (left is None or side > _cross(p[0], p[1], q[0], q[1], left[0], left[1])):
            left = c
        elif cross < 0 and (right is None or side < _cross(p[0], p[1], q[0], q[1], right[0], right[1])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_one(points, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(points):
        if not _contains(c, q):
            c = _diameter(p, q) if c[2] == 0.0 else _circle_two(points[: i + 1], p, q)
    return c


def min_enclosing_circle(points) -> tuple[float, float, float]:
    """Smallest circle ``(cx, cy, r)`` containing every point.

    Randomized incremental construction (expected linear time).  Points are
    deduplicated and sorted before a fixed-seed shuffle, so the result does
    not depend on input order.
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if not pts:
        raise EmptySet("minimum enclosing circle of an empty point set")
    random.Random(0x5EC).shuffle(pts)
    c = None
    for i, p in enumerate(pts):
        if c is None or not _contains(c, p):
            c = _circle_one(pts[: i + 1], p)
    return c


def pixel_hull_candidates(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Leftmost and rightmost pixel of every row.

    The convex hull of a pixel set (and hence its enclosing circle) is
    determined by these points alone.
    """
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    order = np.lexsort((xs, ys))
    xs, ys = xs[order], ys[order]
    first = np.r_[True, ys[1:] != ys[:-1]]
    last = np.r_[ys[1:] != ys[:-1], True]
    keep = first | last
    return np.column_stack([xs[keep], ys[keep]])


def _collinear(centers: np.ndarray) -> bool:
    d = centers - centers.mean(axis=0)
    s = np.linalg.svd(d, compute_uv=False)
    return s[0] == 0 or s[1] <= 1e-9 * s[0]


def nearest_neighbour_pairs(centers: np.ndarray) -> set[tuple[int, int]]:
    n = len(centers)
    pairs = set()
    for i in range(n):
        d = np.hypot(*(centers - centers[i]).T)
        d[i] = np.inf
        j = int(np.argmin(d))
        pairs.add((min(i, j), max(i, j)))
    return pairs


def adjacency_pairs(centers) -> set[tuple[int, int]]:
    """Delaunay edges of the centres as ``(i, j)`` pairs with ``i < j``.

    Fewer than three centres, or collinear ones, fall back to nearest
    neighbour pairs.
    """
    centers = np.asarray(centers, dtype=float)
    if len(centers) < 2:
        return set()
    if len(centers) < 3 or _collinear(centers):
        return nearest_neighbour_pairs(centers)
    try:
        tri = Delaunay(centers)
    except QhullError:
        return nearest_neighbour_pairs(centers)
    pairs = set()
    for simplex in tri.simplices:
        a, b, c = sorted(int(v) for v in simplex)
        pairs.update({(a, b), (a, c), (b, c)})
    return pairs
