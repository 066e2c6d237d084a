"""Tridiagonal solves with a cached factorization.

The compiled kernel is used when the extension was built; otherwise the
numpy implementation is used. Set ``PCAEXPAND_BACKEND=python`` to force the
fallback.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import NumericalError, ValidationError
from . import _tridiag_py

_backend = _tridiag_py
BACKEND = "python"
if os.environ.get("PCAEXPAND_BACKEND", "").lower() != "python":
    try:
        from . import _tridiag_ext as _backend  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _backend = _tridiag_py

__all__ = ["BACKEND", "TridiagonalLU", "thomas_solve", "backend_module"]


def backend_module(name: str | None = None):
    if name is None:
        return _backend
    if name == "python":
        return _tridiag_py
    if name == "cython":
        from . import _tridiag_ext

        return _tridiag_ext
    raise ValidationError(f"unknown backend {name!r}")


class TridiagonalLU:
    """LU factors of a tridiagonal matrix, reusable across right-hand sides.

    ``lower`` and ``upper`` have length ``n - 1``; ``lower[i]`` couples row
    ``i + 1`` to column ``i``.
    """

    def __init__(self, lower, diag, upper, backend: str | None = None):
        self._impl = backend_module(backend)
        n = len(diag)
        if len(lower) != n - 1 or len(upper) != n - 1:
            raise ValidationError("off-diagonals must have length n - 1")
        try:
            self._factors = self._impl.factorize(lower, diag, upper)
        except ZeroDivisionError as exc:
            raise NumericalError(str(exc)) from None
        self.n = n

    def solve(self, rhs) -> np.ndarray:
        """Solve for a vector or for every column of an ``(n, k)`` array."""
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.shape[0] != self.n:
            raise ValidationError(f"rhs has {rhs.shape[0]} rows, expected {self.n}")
        work = np.array(rhs.reshape(self.n, -1), dtype=np.float64, order="C", copy=True)
        self._impl.solve_batch(*self._factors, work)
        return work.reshape(rhs.shape)

    def solve_inplace(self, work: np.ndarray) -> np.ndarray:
        """Solve in place; ``work`` must be a C-contiguous float64 ``(n, k)`` array."""
        self._impl.solve_batch(*self._factors, work)
        return work


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a single tridiagonal system (Thomas algorithm)."""
    return TridiagonalLU(lower, diag, upper).solve(rhs)
