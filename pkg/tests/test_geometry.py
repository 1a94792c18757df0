import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pavetex.errors import EmptySet
from pavetex.geometry import (adjacency_pairs, min_enclosing_circle, nearest_neighbour_pairs,
                              pixel_hull_candidates)


def brute_force_mec_radius(pts):
    """O(n^3) oracle: smallest candidate circle (pairs and triples) covering all points."""
    pts = [tuple(p) for p in pts]
    if len(pts) == 1:
        return 0.0
    best = math.inf

    def covers(cx, cy, r):
        return all(math.hypot(x - cx, y - cy) <= r * (1 + 1e-9) + 1e-9 for x, y in pts)

    for a, b in itertools.combinations(pts, 2):
        cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
        r = math.hypot(a[0] - cx, a[1] - cy)
        if r < best and covers(cx, cy, r):
            best = r
    for a, b, c in itertools.combinations(pts, 3):
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-12:
            continue
        ux = ((a[0]**2 + a[1]**2) * (b[1] - c[1]) + (b[0]**2 + b[1]**2) * (c[1] - a[1])
              + (c[0]**2 + c[1]**2) * (a[1] - b[1])) / d
        uy = ((a[0]**2 + a[1]**2) * (c[0] - b[0]) + (b[0]**2 + b[1]**2) * (a[0] - c[0])
              + (c[0]**2 + c[1]**2) * (b[0] - a[0])) / d
        r = math.hypot(a[0] - ux, a[1] - uy)
        if r < best and covers(ux, uy, r):
            best = r
    return best


def test_two_points():
    assert min_enclosing_circle([(0, 0), (2, 0)]) == pytest.approx((1, 0, 1))


def test_single_point():
    assert min_enclosing_circle([(3, 4)]) == (3.0, 4.0, 0.0)


def test_empty():
    with pytest.raises(EmptySet):
        min_enclosing_circle([])


def test_duplicates():
    assert min_enclosing_circle([(1, 1)] * 5 + [(3, 1)])[2] == pytest.approx(1.0)


def test_fifty_random_points_vs_oracle():
    rng = np.random.default_rng(50)
    pts = rng.uniform(-10, 10, (50, 2))
    assert min_enclosing_circle(pts)[2] == pytest.approx(brute_force_mec_radius(pts), abs=1e-9)


def test_random_sets_vs_oracle():
    rng = np.random.default_rng(0)
    for _ in range(150):
        n = int(rng.integers(1, 25))
        pts = rng.uniform(0, 100, (n, 2))
        assert min_enclosing_circle(pts)[2] == pytest.approx(brute_force_mec_radius(pts), abs=1e-9)


def test_integer_pixel_sets_vs_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(2, 30))
        pts = rng.integers(0, 12, (n, 2)).astype(float)
        assert min_enclosing_circle(pts)[2] == pytest.approx(brute_force_mec_radius(pts), abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1, max_size=30))
def test_mec_contains_and_order_independent(pts):
    c = min_enclosing_circle(pts)
    for x, y in pts:
        assert math.hypot(x - c[0], y - c[1]) <= c[2] + 1e-9
    assert min_enclosing_circle(list(reversed(pts))) == c


def test_hull_candidates_keep_mec():
    rng = np.random.default_rng(4)
    yy, xx = np.mgrid[0:30, 0:30]
    blob = (xx - 14.2) ** 2 / 80 + (yy - 15.7) ** 2 / 40 + rng.uniform(0, 0.3, xx.shape) < 1
    ys, xs = np.nonzero(blob)
    full = min_enclosing_circle(np.column_stack([xs, ys]))
    reduced = min_enclosing_circle(pixel_hull_candidates(xs, ys))
    assert reduced == pytest.approx(full, abs=1e-9)


def brute_force_delaunay(centers):
    """Edges of triangles whose circumcircle has no other centre strictly inside."""
    edges = set()
    n = len(centers)
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = centers[i], centers[j], centers[k]
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-9:
            continue
        ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
        uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
        r = math.hypot(a[0] - ux, a[1] - uy)
        if all(math.hypot(centers[m][0] - ux, centers[m][1] - uy) >= r - 1e-9
               for m in range(n) if m not in (i, j, k)):
            edges |= {(i, j), (i, k), (j, k)}
    return edges


def test_adjacency_matches_delaunay_oracle():
    rng = np.random.default_rng(9)
    for _ in range(10):
        centers = rng.uniform(0, 100, (15, 2))
        assert adjacency_pairs(centers) == brute_force_delaunay(centers)


def test_adjacency_fallbacks():
    assert adjacency_pairs(np.zeros((1, 2))) == set()
    assert adjacency_pairs([(0, 0), (5, 0)]) == {(0, 1)}
    line = [(0, 0), (1, 0), (3, 0), (7, 0)]
    assert adjacency_pairs(line) == nearest_neighbour_pairs(np.array(line, float))
