# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; semantics match ``_core_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline bint _less(double ka, Py_ssize_t ia, double kb, Py_ssize_t ib) nogil:
    return ka < kb or (ka == kb and ia < ib)


cdef void _push(double* keys, Py_ssize_t* ids, Py_ssize_t* size,
                double key, Py_ssize_t idx) nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(key, idx, keys[parent], ids[parent]):
            keys[i] = keys[parent]
            ids[i] = ids[parent]
            i = parent
        else:
            break
    keys[i] = key
    ids[i] = idx


cdef Py_ssize_t _pop(double* keys, Py_ssize_t* ids, Py_ssize_t* size) nogil:
    cdef Py_ssize_t top = ids[0]
    cdef Py_ssize_t n = size[0] - 1
    cdef double key = keys[n]
    cdef Py_ssize_t idx = ids[n]
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t child
    size[0] = n
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(keys[child + 1], ids[child + 1], keys[child], ids[child]):
            child += 1
        if _less(keys[child], ids[child], key, idx):
            keys[i] = keys[child]
            ids[i] = ids[child]
            i = child
        else:
            break
    if n > 0:
        keys[i] = key
        ids[i] = idx
    return top


def watershed_flood(elevation, markers, mask):
    cdef const double[:, ::1] elev = np.ascontiguousarray(elevation, dtype=np.float64)
    cdef const cnp.uint8_t[:, ::1] msk = np.ascontiguousarray(mask, dtype=np.uint8)
    labels_arr = np.array(markers, dtype=np.int32, copy=True, order="C")
    labels_arr[np.asarray(msk) == 0] = 0
    cdef int[:, ::1] lab = labels_arr
    cdef Py_ssize_t h = elev.shape[0]
    cdef Py_ssize_t w = elev.shape[1]
    cdef Py_ssize_t total = h * w
    cdef double* keys = <double*> malloc(max(total, 1) * sizeof(double))
    cdef Py_ssize_t* ids = <Py_ssize_t*> malloc(max(total, 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t size = 0
    cdef Py_ssize_t y, x, ny, nx, idx, k
    cdef int current
    cdef int dys[4]
    cdef int dxs[4]
    dys[:] = [-1, 0, 0, 1]
    dxs[:] = [0, -1, 1, 0]
    if keys == NULL or ids == NULL:
        free(keys)
        free(ids)
        raise MemoryError()
    try:
        with nogil:
            for y in range(h):
                for x in range(w):
                    if lab[y, x] != 0:
                        _push(keys, ids, &size, elev[y, x], y * w + x)
            while size > 0:
                idx = _pop(keys, ids, &size)
                y = idx // w
                x = idx - y * w
                current = lab[y, x]
                for k in range(4):
                    ny = y + dys[k]
                    nx = x + dxs[k]
                    if ny < 0 or ny >= h or nx < 0 or nx >= w:
                        continue
                    if msk[ny, nx] and lab[ny, nx] == 0:
                        lab[ny, nx] = current
                        _push(keys, ids, &size, elev[ny, nx], ny * w + nx)
    finally:
        free(keys)
        free(ids)
    return labels_arr


def bilateral(z, int window, double sigma_space, double sigma_range):
    cdef const double[:, ::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t h = zz.shape[0]
    cdef Py_ssize_t w = zz.shape[1]
    cdef int r = window // 2
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double inv_s = 1.0 / (2.0 * sigma_space * sigma_space)
    cdef double inv_r = 1.0 / (2.0 * sigma_range * sigma_range)
    cdef Py_ssize_t y, x, sy, sx
    cdef int dy, dx
    cdef double c, nb, diff, wgt, num, den
    cdef Py_ssize_t side = 2 * r + 1
    spatial_arr = np.empty(side * side, dtype=np.float64)
    cdef double[::1] spatial = spatial_arr
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            spatial[(dy + r) * side + dx + r] = exp(-(dy * dy + dx * dx) * inv_s)
    with nogil:
        for y in range(h):
            for x in range(w):
                c = zz[y, x]
                num = 0.0
                den = 0.0
                for dy in range(-r, r + 1):
                    sy = y + dy
                    if sy < 0:
                        sy = 0
                    elif sy >= h:
                        sy = h - 1
                    for dx in range(-r, r + 1):
                        sx = x + dx
                        if sx < 0:
                            sx = 0
                        elif sx >= w:
                            sx = w - 1
                        nb = zz[sy, sx]
                        diff = nb - c
                        wgt = spatial[(dy + r) * side + dx + r] * exp(-(diff * diff) * inv_r)
                        num = num + wgt * nb
                        den = den + wgt
                out[y, x] = num / den
    return out_arr


def best_split(X, y, sample_idx, features, Py_ssize_t min_samples_leaf):
    cdef const cnp.intp_t[::1] idx = np.ascontiguousarray(sample_idx, dtype=np.intp)
    cdef Py_ssize_t n = idx.shape[0]
    cdef int best_f = -1
    cdef double best_t = 0.0
    cdef double best_score = -INFINITY
    if n < 2 * min_samples_leaf:
        return best_f, best_t, best_score
    cdef const double[::1] y_all = np.ascontiguousarray(y, dtype=np.float64)
    Xa = np.asarray(X, dtype=np.float64)
    cdef double[::1] v
    cdef double[::1] ys
    cdef cnp.intp_t[::1] order
    cdef Py_ssize_t i, f
    cdef double s_left, s_right, total, n_left, n_right, score, f_best_score, thr
    cdef Py_ssize_t f_best_i
    for f in features:
        vals = np.ascontiguousarray(Xa[np.asarray(idx), f], dtype=np.float64)
        order_arr = np.argsort(vals, kind="stable")
        order = order_arr
        v = vals[order_arr]
        ys = np.asarray(y_all)[np.asarray(idx)[order_arr]]
        total = 0.0
        for i in range(n):
            total = total + ys[i]
        f_best_i = -1
        f_best_score = -INFINITY
        s_left = 0.0
        for i in range(n - min_samples_leaf):
            s_left = s_left + ys[i]
            if i < min_samples_leaf - 1:
                continue
            if not (v[i] < v[i + 1]):
                continue
            n_left = <double> (i + 1)
            n_right = n - n_left
            s_right = total - s_left
            score = s_left * s_left / n_left + s_right * s_right / n_right
            if score > f_best_score:
                f_best_score = score
                f_best_i = i
        if f_best_i >= 0 and f_best_score > best_score:
            thr = 0.5 * (v[f_best_i] + v[f_best_i + 1])
            if thr >= v[f_best_i + 1]:
                thr = v[f_best_i]
            best_f = <int> f
            best_t = thr
            best_score = f_best_score
    return best_f, best_t, best_score
