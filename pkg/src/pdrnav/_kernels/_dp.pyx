# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled DP kernels for DTW and discrete Frechet cost matrices.

Cell semantics are identical to the pure-numpy twin in _dp_py.py; the
test-suite asserts backend equality.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

BACKEND = "compiled"


cdef inline double _dist(const double[:, ::1] a, const double[:, ::1] b,
                         Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double s = 0.0
    cdef double diff
    cdef Py_ssize_t c
    for c in range(a.shape[1]):
        diff = a[i, c] - b[j, c]
        s += diff * diff
    return sqrt(s)


def dtw_full(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    D_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t i, j
    cdef double best, d
    with nogil:
        for i in range(n):
            for j in range(m):
                d = _dist(a, b, i, j)
                if i == 0 and j == 0:
                    D[i, j] = d
                    continue
                best = INFINITY
                if i > 0:
                    best = D[i - 1, j]
                if j > 0 and D[i, j - 1] < best:
                    best = D[i, j - 1]
                if i > 0 and j > 0 and D[i - 1, j - 1] < best:
                    best = D[i - 1, j - 1]
                D[i, j] = d + best
    return D_arr


def dtw_banded(double[:, ::1] a, double[:, ::1] b, Py_ssize_t w):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef Py_ssize_t width = 2 * w + 1
    D_arr = np.full((n, width), np.inf)
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t i, j, jlo, jhi, col
    cdef double best, d
    with nogil:
        for i in range(n):
            jlo = i - w
            if jlo < 0:
                jlo = 0
            jhi = i + w
            if jhi > m - 1:
                jhi = m - 1
            for j in range(jlo, jhi + 1):
                col = j - i + w
                d = _dist(a, b, i, j)
                if i == 0 and j == 0:
                    D[i, col] = d
                    continue
                best = INFINITY
                if i > 0 and col + 1 < width:
                    best = D[i - 1, col + 1]
                if col > 0 and D[i, col - 1] < best:
                    best = D[i, col - 1]
                if i > 0 and j > 0 and D[i - 1, col] < best:
                    best = D[i - 1, col]
                D[i, col] = d + best
    return D_arr


def frechet_full(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    D_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t i, j
    cdef double best, d
    with nogil:
        for i in range(n):
            for j in range(m):
                d = _dist(a, b, i, j)
                if i == 0 and j == 0:
                    D[i, j] = d
                    continue
                best = INFINITY
                if i > 0:
                    best = D[i - 1, j]
                if j > 0 and D[i, j - 1] < best:
                    best = D[i, j - 1]
                if i > 0 and j > 0 and D[i - 1, j - 1] < best:
                    best = D[i - 1, j - 1]
                D[i, j] = d if d > best else best
    return D_arr


def frechet_banded(double[:, ::1] a, double[:, ::1] b, Py_ssize_t w):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef Py_ssize_t width = 2 * w + 1
    D_arr = np.full((n, width), np.inf)
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t i, j, jlo, jhi, col
    cdef double best, d
    with nogil:
        for i in range(n):
            jlo = i - w
            if jlo < 0:
                jlo = 0
            jhi = i + w
            if jhi > m - 1:
                jhi = m - 1
            for j in range(jlo, jhi + 1):
                col = j - i + w
                d = _dist(a, b, i, j)
                if i == 0 and j == 0:
                    D[i, col] = d
                    continue
                best = INFINITY
                if i > 0 and col + 1 < width:
                    best = D[i - 1, col + 1]
                if col > 0 and D[i, col - 1] < best:
                    best = D[i, col - 1]
                if i > 0 and j > 0 and D[i - 1, col] < best:
                    best = D[i - 1, col]
                D[i, col] = d if d > best else best
    return D_arr
