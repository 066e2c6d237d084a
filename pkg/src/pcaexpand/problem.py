"""A heat-equation pricing problem in principal coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import ModelSpec, Spectrum, anchor_point, build_covariance, coordinate_map, spectrum
from .payoff import PayoffSpec, initial_condition

__all__ = ["HeatProblem", "heat_problem", "cutoff_level"]


@dataclass(frozen=True)
class HeatProblem:
    """``du/dt = sum lambdas_k u_{z_k z_k}``, ``u(., 0) = g``, read at ``anchor`` at ``horizon``."""

    lambdas: np.ndarray
    anchor: np.ndarray
    horizon: float
    g: Callable[[np.ndarray], np.ndarray]
    cutoff: Optional[float] = None
    spectrum: Optional[Spectrum] = None

    @property
    def n(self) -> int:
        return len(self.lambdas)

    def with_lambdas(self, lambdas) -> "HeatProblem":
        return HeatProblem(np.asarray(lambdas, dtype=float), self.anchor, self.horizon, self.g,
                           self.cutoff, self.spectrum)


def cutoff_level(model: ModelSpec, payoff: PayoffSpec) -> Optional[float]:
    """Clamp level for unbounded payoffs: ten times the basket notional."""
    if payoff.kind not in ("arithmetic_basket_call", "geometric_basket_call"):
        return None
    notional = float(np.abs(np.asarray(payoff.weights)) @ np.asarray(model.spot))
    return 10.0 * max(notional, payoff.strike, 1.0)


def heat_problem(model: ModelSpec, payoff: PayoffSpec) -> HeatProblem:
    sp = spectrum(build_covariance(model))
    cmap = coordinate_map(model, sp)
    return HeatProblem(
        lambdas=np.asarray(sp.lambdas),
        anchor=anchor_point(model, cmap),
        horizon=model.horizon,
        g=initial_condition(payoff, cmap),
        cutoff=cutoff_level(model, payoff),
        spectrum=sp,
    )
