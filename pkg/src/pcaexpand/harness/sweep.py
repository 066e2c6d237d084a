"""Gamma sweeps, power-law fits and CSV artifacts."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np
from scipy import stats

from ..approximate import expansion_value, oracle_term_solver, pde_term_solver
from ..errors import NumericalError, ValidationError
from ..expansion import bound_general, cosine_norms, general_plan
from ..montecarlo import (
    estimate_price,
    estimate_truncation_error,
    estimate_truncation_error_conditional,
)
from ..oracle import cosine_solution, digital_geometric_price, geometric_call_price
from ..problem import heat_problem
from .config import ExperimentConfig

__all__ = [
    "CSV_HEADER",
    "ConvergenceRecord",
    "run_sweep",
    "evaluate_gamma",
    "fit_power_law",
    "power_law_fit",
    "emit_csv",
    "write_records",
    "read_csv",
    "format_summary",
]

CSV_HEADER = ("gamma", "lambda2", "expansion", "reference", "abs_error", "stderr", "bound")


@dataclass(frozen=True)
class ConvergenceRecord:
    """One sweep point.

    ``lambda2`` is the second eigenvalue of the covariance matrix, i.e.
    twice the diffusion coefficient of the second principal coordinate.
    """

    gamma: float
    lambda2: float
    expansion: float
    reference: float
    abs_error: float
    stderr: float = 0.0
    bound: Optional[float] = None

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValidationError(f"abs_error must be nonnegative, got {self.abs_error}")


def _reference(cfg: ExperimentConfig, model, payoff, problem, plan, expansion: float):
    """Return ``(reference, abs_error, stderr)``."""
    if cfg.reference == "oracle":
        if payoff.kind == "cosine_product":
            ref = cosine_solution(problem.anchor, problem.horizon, problem.lambdas)
        elif payoff.kind == "geometric_basket_call":
            ref = geometric_call_price(model, payoff.weights, payoff.strike)
        elif payoff.kind == "digital_geometric_call":
            ref = digital_geometric_price(model, payoff.weights, payoff.strike)
        else:
            raise ValidationError(f"no closed-form reference for payoff kind {payoff.kind!r}")
        return ref, abs(expansion - ref), 0.0
    if cfg.reference == "mc":
        est = estimate_price(problem, cfg=cfg.mc)
        return est.mean, abs(expansion - est.mean), est.stderr
    # coupled estimators target u - u^xi directly on shared draws
    if cfg.reference == "mc_conditional":
        est = estimate_truncation_error_conditional(problem, payoff, plan, cfg.mc)
    else:
        est = estimate_truncation_error(problem, None, plan, cfg.mc)
    return expansion + est.mean, abs(est.mean), est.stderr


def evaluate_gamma(cfg: ExperimentConfig, gamma: float) -> ConvergenceRecord:
    model = cfg.model(gamma)
    payoff = cfg.payoff_spec()
    problem = heat_problem(model, payoff)
    plan = general_plan(cfg.r, cfg.m, cfg.n_assets)
    if cfg.subsolver == "oracle":
        solver = oracle_term_solver(problem, payoff)
    else:
        solver = pde_term_solver(problem, cfg.resolution)
    try:
        value, _ = expansion_value(plan, solver, cfg.workers)
    except NumericalError as exc:
        raise NumericalError(f"gamma={gamma}: {exc}") from exc
    ref, err, se = _reference(cfg, model, payoff, problem, plan, value)
    bound = None
    if payoff.kind == "cosine_product":
        bound = bound_general(cfg.horizon, problem.lambdas, cfg.r, cfg.m,
                              cosine_norms(cfg.n_assets, cfg.r, cfg.m + 1))
    lam2 = float(problem.spectrum.variances[1]) if problem.n > 1 else 0.0
    return ConvergenceRecord(gamma=float(gamma), lambda2=lam2, expansion=float(value),
                             reference=float(ref), abs_error=float(err), stderr=float(se),
                             bound=None if bound is None else float(bound))


def run_sweep(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """One record per gamma, in the order of ``cfg.gamma_list``."""
    return [evaluate_gamma(cfg, g) for g in cfg.gamma_list]


def power_law_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """OLS slope of ``log y`` on ``log x`` and its 95% confidence half-width."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    n = lx.size
    if n < 3:
        raise ValidationError(f"power-law fit needs at least 3 points, got {n}")
    fit = stats.linregress(lx, ly)
    ci = float(stats.t.ppf(0.975, n - 2) * fit.stderr)
    return float(fit.slope), ci


def fit_power_law(records: Iterable[ConvergenceRecord],
                  lambda2_max: Optional[float] = None) -> tuple[float, float]:
    """Fit ``abs_error ~ c * lambda2^p``; returns ``(p, ci95)``.

    Records with nonpositive error are dropped with a warning; records with
    ``lambda2 > lambda2_max`` are dropped silently.
    """
    pts = []
    for rec in records:
        if lambda2_max is not None and rec.lambda2 > lambda2_max:
            continue
        if not (rec.abs_error > 0 and rec.lambda2 > 0):
            warnings.warn(f"excluding gamma={rec.gamma}: nonpositive error or lambda2", stacklevel=2)
            continue
        pts.append((rec.lambda2, rec.abs_error))
    if len(pts) < 3:
        raise ValidationError(f"need at least 3 usable records for a fit, got {len(pts)}")
    x, y = zip(*pts)
    return power_law_fit(x, y)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def write_records(records: Iterable[ConvergenceRecord], fh: TextIO) -> None:
    """Write records sorted by gamma, largest first. Floats use ``repr`` so they round-trip."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(records, key=lambda r: r.gamma, reverse=True):
        w.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])


def emit_csv(records: Iterable[ConvergenceRecord], path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            write_records(records, fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[ConvergenceRecord]:
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValidationError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for row in reader:
            vals = {k: (None if row[k] == "" else float(row[k])) for k in CSV_HEADER}
            out.append(ConvergenceRecord(**vals))
    return out


def format_summary(exponent: float, ci95: float) -> str:
    if not (math.isfinite(exponent) and math.isfinite(ci95)):
        raise NumericalError("non-finite fit")
    return f"exponent={exponent:.4f} ci95={ci95:.4f}"
