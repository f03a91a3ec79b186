# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot path for region / zero-capacity policy sweeps."""

from libc.math cimport log
from libc.stdlib cimport free, malloc

import numpy as np

cdef double LN2 = 0.6931471805599453


cdef double _prefix_entropy(double* joint, long n1, long n2, long ny,
                            long d1, long d2, long dy,
                            long m1, long m2, long my, double* scratch) nogil:
    cdef long i1, i2, iy, idx
    cdef long total = m1 * m2 * my
    cdef double h = 0.0, p
    for idx in range(total):
        scratch[idx] = 0.0
    for i1 in range(n1):
        for i2 in range(n2):
            for iy in range(ny):
                scratch[((i1 / d1) * m2 + i2 / d2) * my + iy / dy] += \
                    joint[(i1 * n2 + i2) * ny + iy]
    for idx in range(total):
        p = scratch[idx]
        if p > 0.0:
            h -= p * log(p)
    return h


def pair_sum_info(double[:, ::1] q1y, double[:, ::1] q2y,
                  double[:, :, ::1] w, int n, int a1, int a2, int b):
    """Same contract as the reference backend; see fsmac.hot._ref."""
    cdef long n1 = w.shape[0], n2 = w.shape[1], ny = w.shape[2]
    cdef long i1, i2, iy, h
    cdef int i
    cdef double *joint = <double*> malloc(n1 * n2 * ny * sizeof(double))
    cdef double *scratch = <double*> malloc(n1 * n2 * ny * sizeof(double))
    if joint == NULL or scratch == NULL:
        free(joint); free(scratch)
        raise MemoryError()
    cdef double hy_prev = 0.0, hy_i, h12y, h12y_m
    cdef double isum = 0.0
    cdef long p1, p2, py
    try:
        with nogil:
            for i1 in range(n1):
                for i2 in range(n2):
                    for iy in range(ny):
                        h = iy / b if n > 1 else 0
                        joint[(i1 * n2 + i2) * ny + iy] = \
                            q1y[i1, h] * q2y[i2, h] * w[i1, i2, iy]
            for i in range(1, n + 1):
                p1 = 1
                for iy in range(n - i):
                    p1 *= a1
                p2 = 1
                for iy in range(n - i):
                    p2 *= a2
                py = 1
                for iy in range(n - i):
                    py *= b
                hy_i = _prefix_entropy(joint, n1, n2, ny, n1, n2, py,
                                       1, 1, ny / py, scratch)
                h12y = _prefix_entropy(joint, n1, n2, ny, p1, p2, py,
                                       n1 / p1, n2 / p2, ny / py, scratch)
                h12y_m = _prefix_entropy(joint, n1, n2, ny, p1, p2, py * b,
                                         n1 / p1, n2 / p2, ny / (py * b), scratch)
                isum += (hy_i - hy_prev) - (h12y - h12y_m)
                hy_prev = hy_i
    finally:
        free(joint)
        free(scratch)
    return isum / LN2


def pair_directed_infos(double[:, ::1] q1y, double[:, ::1] q2y,
                        double[:, :, ::1] w, int n, int a1, int a2, int b):
    """Same contract as the reference backend; see fsmac.hot._ref."""
    cdef long n1 = w.shape[0], n2 = w.shape[1], ny = w.shape[2]
    cdef long i1, i2, iy, h
    cdef int i
    cdef double *joint = <double*> malloc(n1 * n2 * ny * sizeof(double))
    cdef double *scratch = <double*> malloc(n1 * n2 * ny * sizeof(double))
    if joint == NULL or scratch == NULL:
        free(joint); free(scratch)
        raise MemoryError()
    cdef double hy_prev = 0.0, hy_i, h1y, h1y_m, h2y, h2y_m, h12y, h12y_m
    cdef double i1cc = 0.0, i2cc = 0.0, isum = 0.0
    cdef long p1, p2, py
    try:
        with nogil:
            for i1 in range(n1):
                for i2 in range(n2):
                    for iy in range(ny):
                        h = iy / b if n > 1 else 0
                        joint[(i1 * n2 + i2) * ny + iy] = \
                            q1y[i1, h] * q2y[i2, h] * w[i1, i2, iy]
            for i in range(1, n + 1):
                p1 = 1
                for iy in range(n - i):
                    p1 *= a1
                p2 = 1
                for iy in range(n - i):
                    p2 *= a2
                py = 1
                for iy in range(n - i):
                    py *= b
                # divisors d = size**(n-i); marginal sizes m = full // d
                hy_i = _prefix_entropy(joint, n1, n2, ny, n1, n2, py,
                                       1, 1, ny / py, scratch)
                h1y = _prefix_entropy(joint, n1, n2, ny, p1, n2, py,
                                      n1 / p1, 1, ny / py, scratch)
                h1y_m = _prefix_entropy(joint, n1, n2, ny, p1, n2, py * b,
                                        n1 / p1, 1, ny / (py * b), scratch)
                h2y = _prefix_entropy(joint, n1, n2, ny, n1, p2, py,
                                      1, n2 / p2, ny / py, scratch)
                h2y_m = _prefix_entropy(joint, n1, n2, ny, n1, p2, py * b,
                                        1, n2 / p2, ny / (py * b), scratch)
                h12y = _prefix_entropy(joint, n1, n2, ny, p1, p2, py,
                                       n1 / p1, n2 / p2, ny / py, scratch)
                h12y_m = _prefix_entropy(joint, n1, n2, ny, p1, p2, py * b,
                                         n1 / p1, n2 / p2, ny / (py * b), scratch)
                i1cc += (h2y - h2y_m) - (h12y - h12y_m)
                i2cc += (h1y - h1y_m) - (h12y - h12y_m)
                isum += (hy_i - hy_prev) - (h12y - h12y_m)
                hy_prev = hy_i
    finally:
        free(joint)
        free(scratch)
    return i1cc / LN2, i2cc / LN2, isum / LN2
