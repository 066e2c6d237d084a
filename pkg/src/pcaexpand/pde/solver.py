"""Finite-difference solves of the 1-, 2- and 3-dimensional sub-problems.

Time stepping is Crank-Nicolson in 1D, Peaceman-Rachford ADI in 2D and
Brian's ADI in 3D. Each directional operator carries its own stretching
terms, so every implicit stage is a set of independent tridiagonal solves
sharing one LU factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ValidationError
from .grid import DEFAULT_KAPPA, StretchedAxis, choose_axes
from .tridiag import TridiagonalLU

__all__ = ["SubProblem", "make_subproblem", "evolve", "solve_subproblem", "restrict"]


@dataclass(frozen=True)
class SubProblem:
    """Heat equation ``du/dt = sum_k lambdas[k] d^2u/dz_k^2`` on ``len(axes)`` axes.

    ``initial`` maps points with trailing axis ``len(axes)`` to initial values.
    ``subset`` records which global coordinates the axes correspond to.
    """

    subset: tuple
    lambdas: tuple
    initial: Callable[[np.ndarray], np.ndarray]
    horizon: float
    axes: tuple
    m_steps: int
    cutoff: Optional[float] = None

    def __post_init__(self):
        d = len(self.axes)
        if d > 3:
            raise ValidationError(f"sub-problems of dimension {d} are not supported (max 3)")
        if len(self.lambdas) != d or len(self.subset) != d:
            raise ValidationError("subset, lambdas and axes must have equal length")
        if any(not lam > 0 for lam in self.lambdas):
            raise ValidationError("sub-problem diffusion coefficients must be positive")
        if self.m_steps < 1:
            raise ValidationError("m_steps must be >= 1")
        if self.horizon < 0:
            raise ValidationError("horizon must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def anchor_local(self) -> np.ndarray:
        return np.array([ax.anchor_z for ax in self.axes])


def restrict(g: Callable, anchor, subset: Sequence[int]) -> Callable[[np.ndarray], np.ndarray]:
    """Restrict ``g`` to the plane through ``anchor`` spanned by ``subset`` (1-based)."""
    anchor = np.asarray(anchor, dtype=float)
    idx = [k - 1 for k in subset]

    def local(points):
        points = np.asarray(points, dtype=float)
        full = np.broadcast_to(anchor, points.shape[:-1] + anchor.shape).copy()
        full[..., idx] = points
        return g(full)

    return local


def make_subproblem(g: Callable, anchor, lambdas, subset: Sequence[int], horizon: float,
                    j_points: int = 200, m_steps: int = 12, kappa: float = DEFAULT_KAPPA,
                    cutoff: Optional[float] = None) -> SubProblem:
    """Build the sub-problem for ``subset`` of the global problem ``(g, lambdas)``.

    Directions with zero diffusion are dropped; their coordinate stays at the
    anchor value.
    """
    lam = np.asarray(lambdas, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    # nothing diffuses over a zero horizon
    active = tuple(k for k in subset if lam[k - 1] > 0.0) if horizon > 0 else ()
    axes = tuple(choose_axes(lam[k - 1], horizon, anchor[k - 1], j_points, kappa) for k in active)
    return SubProblem(
        subset=active,
        lambdas=tuple(float(lam[k - 1]) for k in active),
        initial=restrict(g, anchor, active),
        horizon=float(horizon),
        axes=axes,
        m_steps=m_steps,
        cutoff=cutoff,
    )


def _initial_grid(p: SubProblem) -> np.ndarray:
    nodes = [ax.nodes_z() for ax in p.axes]
    # end nodes sit at +-infinity; evaluate just inside and copy outwards
    inner = [z[1:-1] for z in nodes]
    mesh = np.stack(np.meshgrid(*inner, indexing="ij"), axis=-1)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(p.initial(mesh), dtype=float)
    if p.cutoff is not None:
        vals = np.clip(vals, -p.cutoff, p.cutoff)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("initial data is not finite on the grid; set a cutoff")
    u = np.pad(vals, 1, mode="edge")
    return u


def _apply(u: np.ndarray, axis: int, bands) -> np.ndarray:
    lo, di, up = bands
    v = np.moveaxis(u, axis, 0)
    shape = (-1,) + (1,) * (v.ndim - 1)
    out = di.reshape(shape) * v
    out[1:] += lo[1:].reshape(shape) * v[:-1]
    out[:-1] += up[:-1].reshape(shape) * v[1:]
    return np.moveaxis(out, 0, axis)


def _implicit(theta: float, bands) -> TridiagonalLU:
    lo, di, up = bands
    return TridiagonalLU(-theta * lo[1:], 1.0 - theta * di, -theta * up[:-1])


def _solve_along(lu: TridiagonalLU, rhs: np.ndarray, axis: int) -> np.ndarray:
    v = np.moveaxis(rhs, axis, 0)
    shape = v.shape
    work = np.ascontiguousarray(v).reshape(shape[0], -1)
    lu.solve_inplace(work)
    return np.moveaxis(work.reshape(shape), 0, axis)


def evolve(p: SubProblem, callback: Optional[Callable[[int, np.ndarray], None]] = None) -> np.ndarray:
    """Return the grid solution at the horizon.

    ``callback(step, u)`` is invoked after the initial fill (step 0) and after
    every time step.
    """
    u = _initial_grid(p)
    if callback is not None:
        callback(0, u)
    if p.horizon == 0.0:
        return u
    dt = p.horizon / p.m_steps
    half = 0.5 * dt
    bands = [ax.operator_bands(lam) for ax, lam in zip(p.axes, p.lambdas)]
    lus = [_implicit(half, b) for b in bands]
    d = p.dim
    for step in range(1, p.m_steps + 1):
        if d == 1:
            u = _solve_along(lus[0], u + half * _apply(u, 0, bands[0]), 0)
        elif d == 2:
            star = _solve_along(lus[0], u + half * _apply(u, 1, bands[1]), 0)
            u = _solve_along(lus[1], star + half * _apply(star, 0, bands[0]), 1)
        else:
            a1 = _apply(u, 1, bands[1])
            a2 = _apply(u, 2, bands[2])
            s1 = _solve_along(lus[0], u + half * (a1 + a2), 0)
            s2 = _solve_along(lus[1], s1 - half * a1, 1)
            s3 = _solve_along(lus[2], s2 - half * a2, 2)
            u = 2.0 * s3 - u
        if callback is not None:
            callback(step, u)
    return u


def solve_subproblem(p: SubProblem) -> float:
    """Value of the sub-problem at the anchor node at the horizon."""
    if p.dim == 0:
        return float(p.initial(np.zeros((0,))))
    u = evolve(p)
    return float(u[tuple(ax.mid for ax in p.axes)])
