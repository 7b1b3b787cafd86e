# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split scanners; see _pykernels.py for the contract."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def msop_split(const double[::1] xs, const double[:, ::1] R, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t g = R.shape[1]
    cdef Py_ssize_t i, c, pos
    cdef double best = -INFINITY
    cdef Py_ssize_t best_pos = -1
    cdef double ml, mr, v, score
    cdef double[::1] left = np.zeros(g, dtype=np.float64)
    cdef double[::1] total = np.zeros(g, dtype=np.float64)

    if n - min_leaf < min_leaf:
        return best, best_pos
    for i in range(n):
        for c in range(g):
            total[c] = total[c] + R[i, c]
    # rows [0, pos) go left
    for i in range(n - min_leaf):
        for c in range(g):
            left[c] = left[c] + R[i, c]
        pos = i + 1
        if pos < min_leaf or not (xs[i] < xs[pos]):
            continue
        ml = left[0]
        mr = total[0] - left[0]
        for c in range(1, g):
            if left[c] > ml:
                ml = left[c]
            v = total[c] - left[c]
            if v > mr:
                mr = v
        score = ml + mr
        if score > best:
            best = score
            best_pos = pos
    return best, best_pos


def entropy_split(const double[::1] xs, const cnp.int64_t[::1] labels, Py_ssize_t n_classes,
                  Py_ssize_t min_leaf, const double[::1] plogp):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i, c, pos
    cdef double best = INFINITY
    cdef Py_ssize_t best_pos = -1
    cdef double cost_l, cost_r, cost
    cdef cnp.int64_t[::1] left = np.zeros(n_classes, dtype=np.int64)
    cdef cnp.int64_t[::1] total = np.zeros(n_classes, dtype=np.int64)

    if n - min_leaf < min_leaf:
        return best, best_pos
    for i in range(n):
        total[labels[i]] += 1
    for i in range(n - min_leaf):
        left[labels[i]] += 1
        pos = i + 1
        if pos < min_leaf or not (xs[i] < xs[pos]):
            continue
        cost_l = plogp[pos]
        cost_r = plogp[n - pos]
        for c in range(n_classes):
            cost_l = cost_l - plogp[left[c]]
            cost_r = cost_r - plogp[total[c] - left[c]]
        cost = cost_l + cost_r
        if cost < best:
            best = cost
            best_pos = pos
    return best, best_pos


def sse_split(const double[::1] xs, const double[::1] y, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i, pos
    cdef double best = INFINITY
    cdef Py_ssize_t best_pos = -1
    cdef double s_t = 0.0, q_t = 0.0, s_l = 0.0, q_l = 0.0
    cdef double s_r, q_r, n_l, n_r, cost

    if n - min_leaf < min_leaf:
        return best, best_pos
    for i in range(n):
        s_t = s_t + y[i]
        q_t = q_t + y[i] * y[i]
    for i in range(n - min_leaf):
        s_l = s_l + y[i]
        q_l = q_l + y[i] * y[i]
        pos = i + 1
        if pos < min_leaf or not (xs[i] < xs[pos]):
            continue
        n_l = <double>pos
        n_r = <double>(n - pos)
        s_r = s_t - s_l
        q_r = q_t - q_l
        cost = (q_l - (s_l * s_l) / n_l) + (q_r - (s_r * s_r) / n_r)
        if cost < best:
            best = cost
            best_pos = pos
    return best, best_pos
