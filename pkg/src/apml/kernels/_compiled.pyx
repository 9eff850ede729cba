# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_pure``."""

import numpy as np
cimport numpy as cnp
from cython cimport floating
from libc.math cimport exp, log, sqrt, fabs, INFINITY

cnp.import_array()


def pairwise_distances(const floating[:, ::1] x, const floating[:, ::1] y, bint squared=False):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, t
    dtype = np.float32 if floating is float else np.float64
    out = np.empty((n, m), dtype=dtype)
    cdef floating[:, ::1] c = out
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    t = <double>x[i, k] - <double>y[j, k]
                    acc = acc + t * t
                if squared:
                    c[i, j] = <floating>acc
                else:
                    c[i, j] = <floating>sqrt(acc)
    return out


def adaptive_softmax_rows(const floating[:, ::1] c, double p_min, double delta, double eps_gap):
    cdef Py_ssize_t n = c.shape[0], k = c.shape[1]
    cdef Py_ssize_t i, j, amin, sec
    cdef double mn, best, s, t, temp, log_ratio = 0.0, uniform = 1.0 / k
    dtype = np.float32 if floating is float else np.float64
    probs_arr = np.empty((n, k), dtype=dtype)
    temp_arr = np.zeros(n, dtype=dtype)
    override_arr = np.zeros(n, dtype=np.uint8)
    argmin_arr = np.empty(n, dtype=np.intp)
    second_arr = np.empty(n, dtype=np.intp)
    cdef floating[:, ::1] probs = probs_arr
    cdef floating[::1] temperature = temp_arr
    cdef cnp.uint8_t[::1] override = override_arr
    cdef Py_ssize_t[::1] argmin = argmin_arr
    cdef Py_ssize_t[::1] second = second_arr
    if k > 1:
        log_ratio = log((k - 1) * p_min / (1.0 - p_min))
    with nogil:
        for i in range(n):
            amin = 0
            mn = c[i, 0]
            for j in range(1, k):
                if c[i, j] < mn:
                    mn = c[i, j]
                    amin = j
            sec = -1
            best = INFINITY
            for j in range(k):
                t = <double>c[i, j] - mn
                if t > 0 and t < best:
                    best = t
                    sec = j
            if sec < 0:
                best = 0.0
            argmin[i] = amin
            second[i] = sec
            if k == 1 or best < eps_gap:
                if k > 1:
                    override[i] = 1
                for j in range(k):
                    probs[i, j] = <floating>uniform
                continue
            temp = log_ratio / (best + delta)
            temperature[i] = <floating>temp
            s = 0.0
            for j in range(k):
                t = exp(-temp * (<double>c[i, j] - mn))
                probs[i, j] = <floating>t
                s = s + t
            for j in range(k):
                probs[i, j] = <floating>(probs[i, j] / s)
    return probs_arr, temp_arr, override_arr, argmin_arr, second_arr


def adaptive_softmax_cols(const floating[:, ::1] c, double p_min, double delta, double eps_gap):
    """Column-wise counterpart of ``adaptive_softmax_rows``, traversing ``c`` row by row."""
    cdef Py_ssize_t n = c.shape[0], m = c.shape[1]
    cdef Py_ssize_t i, j
    cdef double t, log_ratio = 0.0, uniform = 1.0 / n
    dtype = np.float32 if floating is float else np.float64
    probs_arr = np.empty((n, m), dtype=dtype)
    temp_arr = np.zeros(m, dtype=dtype)
    override_arr = np.zeros(m, dtype=np.uint8)
    argmin_arr = np.zeros(m, dtype=np.intp)
    second_arr = np.full(m, -1, dtype=np.intp)
    cdef floating[:, ::1] probs = probs_arr
    cdef floating[::1] temperature = temp_arr
    cdef cnp.uint8_t[::1] override = override_arr
    cdef Py_ssize_t[::1] argmin = argmin_arr
    cdef Py_ssize_t[::1] second = second_arr
    cdef double[::1] mn = np.empty(m)
    cdef double[::1] best = np.full(m, INFINITY)
    cdef double[::1] temp = np.zeros(m)
    cdef double[::1] sums = np.zeros(m)
    if n > 1:
        log_ratio = log((n - 1) * p_min / (1.0 - p_min))
    with nogil:
        for j in range(m):
            mn[j] = c[0, j]
        for i in range(1, n):
            for j in range(m):
                if c[i, j] < mn[j]:
                    mn[j] = c[i, j]
                    argmin[j] = i
        for i in range(n):
            for j in range(m):
                t = <double>c[i, j] - mn[j]
                if t > 0 and t < best[j]:
                    best[j] = t
                    second[j] = i
        for j in range(m):
            if second[j] < 0:
                best[j] = 0.0
            if n > 1 and best[j] < eps_gap:
                override[j] = 1
            elif n > 1:
                temp[j] = log_ratio / (best[j] + delta)
                temperature[j] = <floating>temp[j]
        for i in range(n):
            for j in range(m):
                if temp[j] > 0:
                    t = exp(-temp[j] * (<double>c[i, j] - mn[j]))
                    probs[i, j] = <floating>t
                    sums[j] += t
                else:
                    probs[i, j] = <floating>uniform
        for i in range(n):
            for j in range(m):
                if temp[j] > 0:
                    probs[i, j] = <floating>(probs[i, j] / sums[j])
    return probs_arr, temp_arr, override_arr, argmin_arr, second_arr


def sinkhorn(const floating[:, ::1] p_in, Py_ssize_t n_iter, double eps_stab, bint keep_iterates=False):
    cdef Py_ssize_t n = p_in.shape[0], m = p_in.shape[1]
    cdef Py_ssize_t it, i, j
    cdef double s, r, v, dev
    p_arr = np.array(p_in, copy=True)
    cdef floating[:, ::1] p = p_arr
    row_arr = np.empty(n_iter)
    col_arr = np.empty(n_iter)
    cdef double[::1] row_dev = row_arr
    cdef double[::1] col_dev = col_arr
    cdef double[::1] colsum = np.zeros(m)
    cdef double[::1] rowsum = np.empty(n)
    iterates = np.empty((n_iter, n, m), dtype=p_arr.dtype) if keep_iterates else None
    with nogil:
        for i in range(n):
            for j in range(m):
                colsum[j] += p[i, j]
    for it in range(n_iter):
        if keep_iterates:
            iterates[it] = p_arr
        with nogil:
            # column step; row sums of the result are accumulated on the way
            for j in range(m):
                colsum[j] = 1.0 / (colsum[j] + eps_stab)
            for i in range(n):
                s = 0.0
                for j in range(m):
                    p[i, j] = <floating>(p[i, j] * colsum[j])
                    s += p[i, j]
                rowsum[i] = s
            # row step; column sums feed the residual and the next column step
            for j in range(m):
                colsum[j] = 0.0
            dev = 0.0
            for i in range(n):
                r = 1.0 / (rowsum[i] + eps_stab)
                s = 0.0
                for j in range(m):
                    p[i, j] = <floating>(p[i, j] * r)
                    v = p[i, j]
                    s += v
                    colsum[j] += v
                if fabs(s - 1.0) > dev:
                    dev = fabs(s - 1.0)
            row_dev[it] = dev
            dev = 0.0
            for j in range(m):
                if fabs(colsum[j] - 1.0) > dev:
                    dev = fabs(colsum[j] - 1.0)
            col_dev[it] = dev
    return p_arr, row_arr, col_arr, iterates
