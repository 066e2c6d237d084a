# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tridiagonal kernels; same API as ``_tridiag_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def factorize(lower, diag, upper):
    cdef double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] di = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef Py_ssize_t n = di.shape[0]
    inv_pivot_arr = np.empty(n)
    upper_mod_arr = np.empty(max(n - 1, 0))
    cdef double[::1] inv_pivot = inv_pivot_arr
    cdef double[::1] upper_mod = upper_mod_arr
    cdef double pivot
    cdef Py_ssize_t i
    for i in range(n):
        if i == 0:
            pivot = di[0]
        else:
            pivot = di[i] - lo[i - 1] * upper_mod[i - 1]
        if pivot == 0.0:
            raise ZeroDivisionError(f"zero pivot in row {i}")
        inv_pivot[i] = 1.0 / pivot
        if i < n - 1:
            upper_mod[i] = up[i] * inv_pivot[i]
    return np.asarray(lo), inv_pivot_arr, upper_mod_arr


def solve_batch(lower, inv_pivot, upper_mod, cnp.ndarray rhs):
    cdef double[::1] lo = lower
    cdef double[::1] ip = inv_pivot
    cdef double[::1] um = upper_mod
    cdef double[:, ::1] x = rhs
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t batch = x.shape[1]
    cdef Py_ssize_t i, b
    cdef double l, p, u
    with nogil:
        p = ip[0]
        for b in range(batch):
            x[0, b] *= p
        for i in range(1, n):
            l = lo[i - 1]
            p = ip[i]
            for b in range(batch):
                x[i, b] = (x[i, b] - l * x[i - 1, b]) * p
        for i in range(n - 2, -1, -1):
            u = um[i]
            for b in range(batch):
                x[i, b] -= u * x[i + 1, b]
    return rhs
