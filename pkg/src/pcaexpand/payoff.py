"""Payoffs in asset space and their pullback to principal coordinates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .model import CoordinateMap

__all__ = [
    "KINDS",
    "PayoffSpec",
    "payoff_value",
    "initial_condition",
    "linear_direction",
    "PRESETS",
    "payoff_preset",
]

KINDS = (
    "arithmetic_basket_call",
    "geometric_basket_call",
    "digital_geometric_call",
    "cosine_product",
    "custom",
)

_GEOMETRIC = ("geometric_basket_call", "digital_geometric_call")


@dataclass(frozen=True)
class PayoffSpec:
    """European payoff ``h(S_T)``.

    For ``custom``, ``func`` maps an array of asset prices with trailing axis
    of length N to payoff values. ``cosine_product`` ignores weights and
    strike and is defined directly in principal coordinates.
    """

    kind: str
    weights: tuple = ()
    strike: float = 0.0
    func: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown payoff kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.kind == "custom" and self.func is None:
            raise ValidationError("custom payoff needs func")
        if self.kind not in ("cosine_product", "custom") and not self.weights:
            raise ValidationError(f"{self.kind} needs weights")

    @property
    def n(self) -> int:
        return len(self.weights)

    def check_dimension(self, n: int) -> None:
        if self.kind in ("cosine_product", "custom"):
            return
        if len(self.weights) != n:
            raise ValidationError(f"payoff has {len(self.weights)} weights but the model has {n} assets")


def _geometric_log_basket(w: np.ndarray, s: np.ndarray) -> np.ndarray:
    if np.any(s <= 0):
        raise ValidationError("geometric payoffs need strictly positive prices")
    return np.log(s) @ w


def payoff_value(p: PayoffSpec, s):
    """Evaluate ``h(s)``; ``s`` has a trailing axis of length N.

    For ``cosine_product`` the argument is interpreted as ``z``.
    """
    s = np.asarray(s, dtype=float)
    if p.kind == "cosine_product":
        return np.prod(np.cos(s), axis=-1)
    if p.kind == "custom":
        return p.func(s)
    w = np.asarray(p.weights)
    if s.shape[-1] != w.size:
        raise ValidationError(f"expected {w.size} prices, got {s.shape[-1]}")
    if p.kind == "arithmetic_basket_call":
        return np.maximum(s @ w - p.strike, 0.0)
    basket = np.exp(_geometric_log_basket(w, s))
    if p.kind == "geometric_basket_call":
        return np.maximum(basket - p.strike, 0.0)
    return (basket >= p.strike).astype(float)


def initial_condition(p: PayoffSpec, cmap: CoordinateMap) -> Callable[[np.ndarray], np.ndarray]:
    """Initial data ``g(z) = h(exp(Q z))`` of the principal-axis heat equation."""
    q = np.asarray(cmap.q_matrix)
    p.check_dimension(q.shape[0])
    if p.kind == "cosine_product":
        return lambda z: np.prod(np.cos(np.asarray(z, dtype=float)), axis=-1)

    if p.kind in _GEOMETRIC:
        # log-basket is linear in z; skip the exp/log round trip
        direction = q.T @ np.asarray(p.weights)
        strike = p.strike
        if p.kind == "geometric_basket_call":
            return lambda z: np.maximum(np.exp(np.asarray(z, dtype=float) @ direction) - strike, 0.0)
        log_strike = np.log(strike) if strike > 0 else -np.inf
        return lambda z: (np.asarray(z, dtype=float) @ direction >= log_strike).astype(float)

    def g(z):
        x = np.asarray(z, dtype=float) @ q.T
        with np.errstate(over="ignore"):
            return payoff_value(p, np.exp(x))

    return g


def linear_direction(p: PayoffSpec, cmap: CoordinateMap) -> np.ndarray:
    """``Q^T w``: geometric payoffs depend on ``z`` only through ``a . z``."""
    if p.kind not in _GEOMETRIC:
        raise ValidationError(f"{p.kind} is not a function of a single linear form")
    return np.asarray(cmap.q_matrix).T @ np.asarray(p.weights)


_FIG4_OMEGA1 = (-0.1160, 0.0929, -0.6527, -0.1121, 0.6986, 0.2091, -0.0438, -0.0758, 0.0000, 0.000)
_FIG4_OMEGA2 = (0.1130, -0.0607, -0.1708, -0.2057, 0.8971, -0.2467, -0.1831, -0.1085, -0.0345, -0.0001)

# name -> (kind, weights, default strike)
PRESETS: dict[str, tuple[str, tuple, float]] = {
    "arith-omega1": ("arithmetic_basket_call", (0.1,) * 10, 100.0),
    "arith-omega2": ("arithmetic_basket_call", (4 / 30,) * 5 + (2 / 30,) * 5, 100.0),
    "arith-omega3": ("arithmetic_basket_call", (0.25,) * 7 + (-0.25,) * 3, 100.0),
    "arith5-omega1": ("arithmetic_basket_call", (1.0, -1.0, 1.0, -1.0, 1.0), 100.0),
    "arith5-omega2": ("arithmetic_basket_call", (1.5, 1.5, -0.5, -0.5, -1.0), 100.0),
    "arith5-aligned": ("arithmetic_basket_call", (0.2,) * 5, 100.0),
    "geom-kink-omega1": ("geometric_basket_call", _FIG4_OMEGA1, 1.0),
    "geom-kink-omega2": ("geometric_basket_call", _FIG4_OMEGA2, 1.0),
    "geom-mean10": ("geometric_basket_call", (0.1,) * 10, 100.0),
    "digital-geom-mean10": ("digital_geometric_call", (0.1,) * 10, 100.0),
    "cosine": ("cosine_product", (), 0.0),
}


def payoff_preset(name: str, strike: float | None = None) -> PayoffSpec:
    try:
        kind, weights, default_strike = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown payoff preset {name!r}; known: {sorted(PRESETS)}") from None
    return PayoffSpec(kind=kind, weights=weights, strike=default_strike if strike is None else strike)
