"""Experiment configuration: JSON files, named presets and CLI overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from ..approximate import Resolution
from ..errors import ValidationError
from ..model import ModelSpec
from ..montecarlo import MCConfig
from ..payoff import PRESETS, payoff_preset

__all__ = ["ExperimentConfig", "PRESET_CONFIGS", "load_config", "preset_config", "FIG2_GAMMAS"]

REFERENCES = ("oracle", "mc", "mc_coupled", "mc_conditional")
SUBSOLVERS = ("pde", "oracle")

FIG2_GAMMAS = (0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99)


@dataclass(frozen=True)
class ExperimentConfig:
    n_assets: int = 10
    sigma: float = 0.2
    spot: float = 100.0
    horizon: float = 1.0
    risk_free: float = 0.0
    payoff: str = "arith-omega1"
    strike: Optional[float] = None
    r: int = 1
    m: int = 1
    gamma_list: tuple = (0.5,)
    reference: str = "mc_coupled"
    subsolver: str = "pde"
    j_points: int = 200
    m_steps: int = 12
    kappa: float = 5.0
    n_samples: int = 1_000_000
    seed: int = 20240101
    batch: int = 100_000
    antithetic: bool = False
    lambda2_max: Optional[float] = None
    workers: int = 1
    output: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "gamma_list", tuple(float(g) for g in self.gamma_list))
        if not self.gamma_list:
            raise ValidationError("gamma_list must not be empty")
        for g in self.gamma_list:
            if not -1.0 < g < 1.0:
                raise ValidationError(f"gamma {g} outside (-1, 1)")
        if self.reference not in REFERENCES:
            raise ValidationError(f"reference must be one of {REFERENCES}")
        if self.subsolver not in SUBSOLVERS:
            raise ValidationError(f"subsolver must be one of {SUBSOLVERS}")
        if self.payoff not in PRESETS:
            raise ValidationError(f"unknown payoff preset {self.payoff!r}")
        if self.r < 1 or self.m < 0 or self.r + self.m > self.n_assets:
            raise ValidationError(f"invalid expansion (r={self.r}, m={self.m}) for n_assets={self.n_assets}")

    def model(self, gamma: float) -> ModelSpec:
        payoff = self.payoff_spec()
        weights = payoff.weights if payoff.weights else ()
        return ModelSpec(n_assets=self.n_assets, sigma=[self.sigma] * self.n_assets, gamma=gamma,
                         horizon=self.horizon, spot=[self.spot] * self.n_assets,
                         strike=payoff.strike, weights=weights, risk_free=self.risk_free)

    def payoff_spec(self):
        p = payoff_preset(self.payoff, self.strike)
        p.check_dimension(self.n_assets)
        return p

    @property
    def resolution(self) -> Resolution:
        return Resolution(self.j_points, self.m_steps, self.kappa)

    @property
    def mc(self) -> MCConfig:
        return MCConfig(n_samples=self.n_samples, seed=self.seed, batch=self.batch, antithetic=self.antithetic)

    def replace(self, **changes: Any) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["gamma_list"] = list(self.gamma_list)
        return d


PRESET_CONFIGS: dict[str, dict] = {
    # first-order expansion, N = 10 arithmetic basket
    "fig2-desk": dict(n_assets=10, payoff="arith-omega1", r=1, m=1,
                      gamma_list=(0.4, 0.5, 0.6, 0.7, 0.8, 0.9), reference="mc_coupled",
                      j_points=200, m_steps=12, n_samples=1_000_000),
    # second-order expansion, N = 5 basket with alternating weights
    "fig3-desk": dict(n_assets=5, payoff="arith5-omega1", r=1, m=2,
                      gamma_list=FIG2_GAMMAS, reference="mc_conditional",
                      j_points=100, m_steps=12, n_samples=1_000_000),
    # geometric basket with weights orthogonal to the leading eigenvector
    "fig4-desk": dict(n_assets=10, payoff="geom-kink-omega1", strike=1.0, r=1, m=1,
                      gamma_list=(0.4, 0.5, 0.6, 0.7, 0.8, 0.9), reference="oracle",
                      subsolver="pde", j_points=200, m_steps=12),
}


def preset_config(name: str) -> ExperimentConfig:
    try:
        return ExperimentConfig(**PRESET_CONFIGS[name])
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; known: {sorted(PRESET_CONFIGS)}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a JSON object whose keys are :class:`ExperimentConfig` fields.

    A ``"preset"`` key starts from that preset; the other keys override it.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must be a JSON object")
    base = dict(PRESET_CONFIGS.get(data.pop("preset"), {})) if "preset" in data else {}
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    base.update(data)
    return ExperimentConfig(**base)
