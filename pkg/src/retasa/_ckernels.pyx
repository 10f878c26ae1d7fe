# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernel primitives.

Same contract as retasa._pykernels (the NumPy fallback); the loops here fuse
distance, kernel and normalization passes so no (nq, n) temporaries beyond
the output are allocated.
"""

from libc.math cimport exp, sqrt, M_PI, pow

import numpy as np


def gaussian_nw_matrix(double[:, ::1] queries, double[:, ::1] points, double h):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef double inv2h2 = 1.0 / (2.0 * h * h)
    out_arr = np.empty((nq, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, m, s
    for i in range(nq):
        m = 0.0
        for j in range(n):
            acc = 0.0
            for k in range(d):
                diff = queries[i, k] - points[j, k]
                acc += diff * diff
            out[i, j] = acc
            if j == 0 or acc < m:
                m = acc
        s = 0.0
        for j in range(n):
            out[i, j] = exp(-(out[i, j] - m) * inv2h2)
            s += out[i, j]
        for j in range(n):
            out[i, j] /= s
    return out_arr


def epanechnikov_nw_matrix(double[:, ::1] queries, double[:, ::1] points, double h):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    out_arr = np.empty((nq, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double prod, u, s
    for i in range(nq):
        s = 0.0
        for j in range(n):
            prod = 1.0
            for k in range(d):
                u = (queries[i, k] - points[j, k]) / h
                if u < -1.0 or u > 1.0:
                    prod = 0.0
                    break
                prod *= 0.75 * (1.0 - u * u)
            out[i, j] = prod
            s += prod
        if s == 0.0:
            raise ValueError(
                "all kernel weights are zero for at least one query point; "
                "the query lies outside the support of every kernel"
            )
        for j in range(n):
            out[i, j] /= s
    return out_arr


def gaussian_kde_values(double[:, ::1] queries, double[:, ::1] points, double h):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef double inv2h2 = 1.0 / (2.0 * h * h)
    cdef double norm = pow(1.0 / sqrt(2.0 * M_PI), <double>d) / (n * pow(h, <double>d))
    out_arr = np.empty(nq, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, s
    for i in range(nq):
        s = 0.0
        for j in range(n):
            acc = 0.0
            for k in range(d):
                diff = queries[i, k] - points[j, k]
                acc += diff * diff
            s += exp(-acc * inv2h2)
        out[i] = s * norm
    return out_arr


def epanechnikov_kde_values(double[:, ::1] queries, double[:, ::1] points, double h):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef double norm = 1.0 / (n * pow(h, <double>d))
    out_arr = np.empty(nq, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double prod, u, s
    for i in range(nq):
        s = 0.0
        for j in range(n):
            prod = 1.0
            for k in range(d):
                u = (queries[i, k] - points[j, k]) / h
                if u < -1.0 or u > 1.0:
                    prod = 0.0
                    break
                prod *= 0.75 * (1.0 - u * u)
            s += prod
        out[i] = s * norm
    return out_arr
