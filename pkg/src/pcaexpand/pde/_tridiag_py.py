"""Pure-numpy tridiagonal kernels (reference backend).

A factorization is the tuple ``(lower, inv_pivot, upper_mod)`` produced by
:func:`factorize`; :func:`solve_batch` applies it to every column of a
``(n, batch)`` right-hand side in place, looping over rows and vectorising
over columns.
"""

import numpy as np


def factorize(lower, diag, upper):
    lower = np.ascontiguousarray(lower, dtype=np.float64)
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    upper = np.ascontiguousarray(upper, dtype=np.float64)
    n = diag.shape[0]
    inv_pivot = np.empty(n)
    upper_mod = np.empty(max(n - 1, 0))
    pivot = diag[0]
    for i in range(n):
        if i > 0:
            pivot = diag[i] - lower[i - 1] * upper_mod[i - 1]
        if pivot == 0.0:
            raise ZeroDivisionError(f"zero pivot in row {i}")
        inv_pivot[i] = 1.0 / pivot
        if i < n - 1:
            upper_mod[i] = upper[i] * inv_pivot[i]
    return lower, inv_pivot, upper_mod


def solve_batch(lower, inv_pivot, upper_mod, rhs):
    """Overwrite ``rhs`` (shape ``(n, batch)``, C-contiguous) with the solution."""
    n = inv_pivot.shape[0]
    rhs[0] *= inv_pivot[0]
    for i in range(1, n):
        rhs[i] -= lower[i - 1] * rhs[i - 1]
        rhs[i] *= inv_pivot[i]
    for i in range(n - 2, -1, -1):
        rhs[i] -= upper_mod[i] * rhs[i + 1]
    return rhs
