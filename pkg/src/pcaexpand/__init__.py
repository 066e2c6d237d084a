"""Dimension-wise PCA expansions for high-dimensional heat equations.

High-dimensional constant-coefficient parabolic problems are rotated to
principal axes and approximated by weighted sums of 1-, 2- and
3-dimensional sub-problems, which are solved by ADI finite differences.
"""

from .errors import NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = ["NumericalError", "ValidationError", "__version__"]
