# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Sturm-sequence kernels for symmetric tridiagonal matrices."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmax

cnp.import_array()


cdef inline Py_ssize_t _count(const double[::1] d, const double[::1] e2,
                              double sigma, double pivmin) noexcept nogil:
    cdef Py_ssize_t i, n = d.shape[0], cnt = 0
    cdef double q = d[0] - sigma
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0:
        cnt += 1
    for i in range(1, n):
        q = d[i] - sigma - e2[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0:
            cnt += 1
    return cnt


def sturm_count(double[::1] d, double[::1] e2, double sigma, double pivmin):
    """Number of eigenvalues strictly below ``sigma``."""
    cdef Py_ssize_t c
    with nogil:
        c = _count(d, e2, sigma, pivmin)
    return c


def bisect(double[::1] d, double[::1] e2, Py_ssize_t lo, Py_ssize_t hi,
           double lower, double upper, double abstol, double pivmin):
    """Eigenvalues with indices ``lo <= k < hi`` by bisection.

    Every count refines the brackets of all still-open indices, so later
    eigenvalues start from tight intervals.
    """
    cdef Py_ssize_t m = hi - lo, k, j, c
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lb_arr = np.full(m, lower)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ub_arr = np.full(m, upper)
    cdef double[::1] lb = lb_arr
    cdef double[::1] ub = ub_arr
    cdef double mid, eps = 2.220446049250313e-16
    with nogil:
        for k in range(m):
            while ub[k] - lb[k] > abstol + 2.0 * eps * fmax(fabs(lb[k]), fabs(ub[k])):
                mid = 0.5 * (lb[k] + ub[k])
                if mid <= lb[k] or mid >= ub[k]:
                    break
                c = _count(d, e2, mid, pivmin)
                for j in range(k, m):
                    if c > lo + j:
                        if mid < ub[j]:
                            ub[j] = mid
                    else:
                        if mid > lb[j]:
                            lb[j] = mid
    return 0.5 * (lb_arr + ub_arr)
