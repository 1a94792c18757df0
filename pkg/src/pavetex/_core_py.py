"""Pure-Python/numpy implementations of the hot kernels.

Each function mirrors ``_core.pyx`` operation for operation so that both
backends return the same result; flood labels and split choices are
bit-identical, the bilateral filter agrees to libm rounding.
"""
import heapq

import numpy as np

_NEIGHBOURS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def watershed_flood(elevation, markers, mask):
    """Marker-driven priority flood restricted to ``mask``.

    Pixels are popped in ascending ``(elevation, y * width + x)`` order; an
    unlabelled foreground 4-neighbour takes the label of the pixel that
    discovers it.
    """
    elevation = np.ascontiguousarray(elevation, dtype=np.float64)
    h, w = elevation.shape
    labels = np.array(markers, dtype=np.int32, copy=True)
    mask = np.asarray(mask, dtype=bool)
    labels[~mask] = 0
    heap = [(elevation[y, x], y * w + x) for y, x in zip(*np.nonzero(labels))]
    heapq.heapify(heap)
    elev = elevation.tolist()
    lab = labels.tolist()
    msk = mask.tolist()
    while heap:
        _, idx = heapq.heappop(heap)
        y, x = divmod(idx, w)
        current = lab[y][x]
        for dy, dx in _NEIGHBOURS:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and msk[ny][nx] and lab[ny][nx] == 0:
                lab[ny][nx] = current
                heapq.heappush(heap, (elev[ny][nx], ny * w + nx))
    return np.array(lab, dtype=np.int32).reshape(h, w)


def bilateral(z, window, sigma_space, sigma_range):
    z = np.ascontiguousarray(z, dtype=np.float64)
    h, w = z.shape
    r = window // 2
    padded = np.pad(z, r, mode="edge")
    num = np.zeros_like(z)
    den = np.zeros_like(z)
    inv_s = 1.0 / (2.0 * sigma_space * sigma_space)
    inv_r = 1.0 / (2.0 * sigma_range * sigma_range)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            nb = padded[r + dy:r + dy + h, r + dx:r + dx + w]
            diff = nb - z
            wgt = np.exp(-(dy * dy + dx * dx) * inv_s) * np.exp(-(diff * diff) * inv_r)
            num += wgt * nb
            den += wgt
    return num / den


def best_split(X, y, sample_idx, features, min_samples_leaf):
    """Exhaustive least-squares split search over ``features``.

    Returns ``(feature, threshold, score)`` maximizing
    ``S_L^2 / n_L + S_R^2 / n_R``; ties keep the lowest feature index, then
    the lowest threshold.  ``feature`` is -1 when no admissible split exists.
    """
    idx = np.asarray(sample_idx, dtype=np.intp)
    n = len(idx)
    best_f, best_t, best_score = -1, 0.0, -np.inf
    if n < 2 * min_samples_leaf:
        return best_f, best_t, best_score
    yy_all = np.asarray(y, dtype=np.float64)[idx]
    for f in features:
        vals = np.asarray(X[idx, f], dtype=np.float64)
        order = np.argsort(vals, kind="stable")
        v = vals[order]
        cs = np.cumsum(yy_all[order])
        total = cs[-1]
        pos = np.arange(min_samples_leaf - 1, n - min_samples_leaf)
        if len(pos) == 0:
            continue
        pos = pos[v[pos] < v[pos + 1]]
        if len(pos) == 0:
            continue
        n_left = (pos + 1).astype(np.float64)
        n_right = n - n_left
        s_left = cs[pos]
        s_right = total - s_left
        scores = s_left * s_left / n_left + s_right * s_right / n_right
        k = int(np.argmax(scores))
        if scores[k] > best_score:
            i = pos[k]
            thr = 0.5 * (v[i] + v[i + 1])
            if thr >= v[i + 1]:
                thr = v[i]
            best_f, best_t, best_score = int(f), float(thr), float(scores[k])
    return best_f, best_t, best_score
