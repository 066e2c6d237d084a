"""Multi-asset lognormal market and its principal-axis heat equation.

Conventions
-----------
Log-prices ``x = log S`` have covariance ``Sigma * T`` at the horizon. After
rotating with the eigenvectors of ``Sigma / 2`` and removing the drift, the
pricing problem becomes

    du/dt = sum_k lambdas[k] * d^2u/dz_k^2,

so ``Spectrum.lambdas`` are eigenvalues of ``Sigma / 2`` (the diffusion
coefficients; a principal coordinate has variance ``2 * lambda_k * t``).
The eigenvalues of ``Sigma`` itself are exposed as ``Spectrum.variances``;
these are the values usually quoted against the correlation
(e.g. 0.220 / 0.020 for N=10, sigma=0.2, gamma=0.5).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError

__all__ = [
    "ModelSpec",
    "Spectrum",
    "CoordinateMap",
    "correlation_matrix",
    "build_covariance",
    "spectrum",
    "equicorrelation_spectrum",
    "coordinate_map",
    "to_principal",
    "from_principal",
    "anchor_point",
]

_PSD_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """Black-Scholes market with constant volatilities and correlations.

    ``gamma`` is either a scalar equicorrelation or a full correlation matrix.
    """

    n_assets: int
    sigma: Sequence[float]
    gamma: Union[float, Sequence[Sequence[float]]]
    horizon: float = 1.0
    spot: Sequence[float] = ()
    strike: float = 100.0
    weights: Sequence[float] = ()
    risk_free: float = 0.0

    def __post_init__(self):
        n = self.n_assets
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError(f"n_assets must be a positive integer, got {n!r}")
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), (n,)).copy()
        if np.any(sigma <= 0):
            raise ValidationError("volatilities must be positive")
        object.__setattr__(self, "sigma", _frozen(sigma))

        spot = np.asarray(self.spot, dtype=float)
        spot = np.full(n, 100.0) if spot.size == 0 else np.broadcast_to(spot, (n,)).copy()
        if np.any(spot <= 0):
            raise ValidationError("spot prices must be positive")
        object.__setattr__(self, "spot", _frozen(spot))

        weights = np.asarray(self.weights, dtype=float)
        weights = np.full(n, 1.0 / n) if weights.size == 0 else weights
        if weights.shape != (n,):
            raise ValidationError(f"weights must have length {n}, got shape {weights.shape}")
        object.__setattr__(self, "weights", _frozen(weights))

        if self.horizon <= 0:
            raise ValidationError("horizon must be positive")
        if self.strike < 0:
            raise ValidationError("strike must be nonnegative")

        if np.ndim(self.gamma) == 0:
            g = float(self.gamma)
            if not -1.0 < g < 1.0:
                raise ValidationError(f"equicorrelation must lie in (-1, 1), got {g}")
            object.__setattr__(self, "gamma", g)
        else:
            object.__setattr__(self, "gamma", _frozen(self.gamma))
        # validates the correlation matrix eagerly
        _check_correlation(self.correlation)

    @property
    def correlation(self) -> np.ndarray:
        if np.ndim(self.gamma) == 0:
            return correlation_matrix(self.n_assets, self.gamma)
        return np.array(self.gamma, dtype=float)

    @property
    def drift(self) -> np.ndarray:
        """Log-price drift ``r_f - sigma_i^2 / 2``."""
        return self.risk_free - 0.5 * np.asarray(self.sigma) ** 2

    def with_gamma(self, gamma) -> "ModelSpec":
        return ModelSpec(
            n_assets=self.n_assets,
            sigma=self.sigma,
            gamma=gamma,
            horizon=self.horizon,
            spot=self.spot,
            strike=self.strike,
            weights=self.weights,
            risk_free=self.risk_free,
        )


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of ``Sigma / 2``, sorted by decreasing eigenvalue."""

    q_matrix: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q_matrix", _frozen(self.q_matrix))
        object.__setattr__(self, "lambdas", _frozen(self.lambdas))

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def variances(self) -> np.ndarray:
        """Eigenvalues of ``Sigma`` (twice the diffusion coefficients)."""
        return 2.0 * self.lambdas


@dataclass(frozen=True)
class CoordinateMap:
    q_matrix: np.ndarray
    mu: np.ndarray
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "q_matrix", _frozen(self.q_matrix))
        object.__setattr__(self, "mu", _frozen(self.mu))


def correlation_matrix(n: int, gamma: float) -> np.ndarray:
    """Equicorrelation matrix with unit diagonal and ``gamma`` elsewhere."""
    rho = np.full((n, n), float(gamma))
    np.fill_diagonal(rho, 1.0)
    return rho


def _check_correlation(rho: np.ndarray) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"correlation must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.T, atol=1e-14, rtol=0):
        raise ValidationError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(rho), 1.0, atol=1e-14, rtol=0):
        raise ValidationError("correlation matrix must have unit diagonal")
    if np.linalg.eigvalsh(rho).min() < -_PSD_TOL:
        raise ValidationError("correlation matrix is not positive semidefinite")


def build_covariance(spec: ModelSpec) -> np.ndarray:
    """Covariance ``Sigma_ij = sigma_i sigma_j rho_ij`` of the log-returns."""
    rho = spec.correlation
    _check_correlation(rho)
    s = np.asarray(spec.sigma)
    return s[:, None] * s[None, :] * rho


def _canonical_basis(q: np.ndarray, lambdas: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    # Repeated eigenvalues leave the eigenbasis undetermined; pick a
    # reproducible one by Gram-Schmidt on the projected unit vectors so that
    # results do not drift with LAPACK rounding as gamma varies.
    n = len(lambdas)
    q = q.copy()
    scale = max(float(np.abs(lambdas).max(initial=0.0)), 1e-300)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and abs(lambdas[j + 1] - lambdas[i]) <= rtol * scale:
            j += 1
        size = j - i + 1
        if size > 1:
            block = q[:, i : j + 1]
            proj = block @ block.T
            vecs: list[np.ndarray] = []
            for e in np.eye(n):
                v = proj @ e
                for _ in range(2):
                    for u in vecs:
                        v = v - (u @ v) * u
                nv = np.linalg.norm(v)
                if nv > 1e-4:
                    vecs.append(v / nv)
                if len(vecs) == size:
                    break
            q[:, i : j + 1] = np.column_stack(vecs)
        i = j + 1
    return q


def spectrum(covariance) -> Spectrum:
    """Eigen-decomposition of ``covariance / 2``.

    Eigenvalues are sorted in decreasing order; values in ``[-1e-12, 0)`` are
    clamped to zero. Each eigenvector's largest-magnitude entry is made
    positive. Degenerate eigenspaces get a deterministic basis.
    """
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValidationError(f"covariance must be square, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-14, rtol=1e-12):
        raise ValidationError("covariance matrix is not symmetric")
    half = 0.25 * (cov + cov.T)
    lam, q = np.linalg.eigh(half)
    order = np.argsort(-lam, kind="stable")
    lam, q = lam[order], q[:, order]
    if lam.size and lam[-1] < -_PSD_TOL:
        raise ValidationError(f"covariance is not positive semidefinite (eigenvalue {lam[-1]:.3e})")
    lam = np.where(lam < 0.0, 0.0, lam)
    q = _canonical_basis(q, lam)
    mag = np.abs(q)
    # first entry within rounding of the column maximum, so exact ties resolve stably
    idx = np.argmax(mag >= mag.max(axis=0) * (1.0 - 1e-9), axis=0)
    signs = np.sign(q[idx, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return Spectrum(q_matrix=q * signs, lambdas=lam)


def equicorrelation_spectrum(sigma: float, gamma: float, n: int) -> tuple[float, float]:
    """Closed-form eigenvalues of the equicorrelated covariance ``Sigma``.

    Returns ``(sigma^2 ((n-1) gamma + 1), sigma^2 (1 - gamma))``, i.e. the
    ``variances`` of :func:`spectrum`; halve them for diffusion coefficients.
    """
    if not -1.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (-1, 1), got {gamma}")
    s2 = sigma * sigma
    return s2 * ((n - 1) * gamma + 1.0), s2 * (1.0 - gamma)


def coordinate_map(spec: ModelSpec, spec_spectrum: Spectrum | None = None) -> CoordinateMap:
    sp = spec_spectrum if spec_spectrum is not None else spectrum(build_covariance(spec))
    return CoordinateMap(q_matrix=sp.q_matrix, mu=spec.drift, horizon=spec.horizon)


def to_principal(cmap: CoordinateMap, x, t: float) -> np.ndarray:
    """``z = Q^T (x + mu t)``; ``x`` may carry leading batch axes."""
    x = np.asarray(x, dtype=float)
    return (x + cmap.mu * t) @ cmap.q_matrix


def from_principal(cmap: CoordinateMap, z, t: float) -> np.ndarray:
    """``x = Q z - mu t``."""
    z = np.asarray(z, dtype=float)
    return z @ cmap.q_matrix.T - cmap.mu * t


def anchor_point(spec: ModelSpec, cmap: CoordinateMap) -> np.ndarray:
    """Principal coordinates ``Q^T (log S0 + mu T)`` at which prices are read."""
    return to_principal(cmap, np.log(spec.spot), spec.horizon)
