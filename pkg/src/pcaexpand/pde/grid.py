"""Arctan-stretched coordinates mapping the real line onto (0, 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

__all__ = ["StretchedAxis", "stretched_coefficients", "choose_axes", "DEFAULT_KAPPA"]

DEFAULT_KAPPA = 5.0


@dataclass(frozen=True)
class StretchedAxis:
    """``y = arctan(b z + c) / pi + 1/2`` on a uniform mesh of ``j_points`` intervals.

    ``c = -b * anchor_z`` puts the anchor on the middle node ``y = 1/2``.
    """

    b: float
    anchor_z: float
    j_points: int

    def __post_init__(self):
        if not self.b > 0:
            raise ValidationError(f"scale b must be positive, got {self.b}")
        if self.j_points < 2 or self.j_points % 2:
            raise ValidationError(f"j_points must be an even integer >= 2, got {self.j_points}")

    @property
    def c(self) -> float:
        return -self.b * self.anchor_z

    @property
    def h(self) -> float:
        return 1.0 / self.j_points

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.j_points + 1) * self.h

    @property
    def mid(self) -> int:
        return self.j_points // 2

    def to_y(self, z):
        return np.arctan(self.b * np.asarray(z, dtype=float) + self.c) / math.pi + 0.5

    def to_z(self, y):
        """Pre-image of interior nodes; the end points map to -inf / +inf."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            t = np.tan(math.pi * (y - 0.5))
        t = np.where(y <= 0.0, -np.inf, np.where(y >= 1.0, np.inf, t))
        return (t - self.c) / self.b

    def nodes_z(self) -> np.ndarray:
        z = self.to_z(self.y)
        z[self.mid] = self.anchor_z
        return z

    def operator_bands(self, lam: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Bands of the discrete ``lam * d^2/dz^2`` in ``y`` (central differences).

        Returns full-length arrays ``(lo, di, up)`` with row ``j`` reading
        ``lo[j] u[j-1] + di[j] u[j] + up[j] u[j+1]``. The first and last rows
        are zero: the stretched operator degenerates there.
        """
        n = self.j_points + 1
        lo = np.zeros(n)
        di = np.zeros(n)
        up = np.zeros(n)
        a_yy, a_y = stretched_coefficients(self, self.y[1:-1])
        h = self.h
        lo[1:-1] = lam * (a_yy / h**2 - a_y / (2 * h))
        di[1:-1] = -2.0 * lam * a_yy / h**2
        up[1:-1] = lam * (a_yy / h**2 + a_y / (2 * h))
        return lo, di, up


def stretched_coefficients(axis: StretchedAxis, y):
    """``(a_yy, a_y)`` with ``d^2/dz^2 = a_yy d^2/dy^2 + a_y d/dy``.

    ``a_yy = (dy/dz)^2`` and ``a_y = d^2y/dz^2``, written in ``y``; both
    vanish at the end points of (0, 1).
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any((y_arr <= 0.0) | (y_arr >= 1.0)):
        raise ValidationError("stretched coefficients are defined for y in (0, 1) only")
    theta = math.pi * (y_arr - 0.5)
    cos = np.cos(theta)
    dy_dz = (axis.b / math.pi) * cos**2
    d2y_dz2 = -(2.0 * axis.b**2 / math.pi) * cos**3 * np.sin(theta)
    if np.ndim(y) == 0:
        return float(dy_dz**2), float(d2y_dz2)
    return dy_dz**2, d2y_dz2


def choose_axes(lambda_k: float, horizon: float, anchor: float, j_points: int = 200,
                kappa: float = DEFAULT_KAPPA) -> StretchedAxis:
    """Axis whose central half covers ``+- kappa`` heat-kernel standard deviations."""
    if not lambda_k > 0:
        raise ValidationError(f"diffusion coefficient must be positive, got {lambda_k}")
    b = 1.0 / (kappa * math.sqrt(2.0 * lambda_k * horizon))
    return StretchedAxis(b=b, anchor_z=float(anchor), j_points=j_points)
