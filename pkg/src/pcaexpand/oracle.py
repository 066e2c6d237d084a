"""Closed-form reference values.

* ``cosine_*``: the product-of-cosines family, for which every sub-problem
  ``u^nu`` is known exactly and every mixed derivative has sup-norm one.
* lognormal prices for geometric-basket calls and digitals, both for the
  full market and for any sub-problem ``u^nu`` in principal coordinates.
* derivatives in ``lambda_2`` of the two-dimensional kink examples.

The normal cdf is ``scipy.special.ndtr`` (double precision, absolute error
well below 1e-15).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import ValidationError
from .expansion import ExpansionPlan, IndexSet
from .model import ModelSpec, build_covariance

__all__ = [
    "norm_cdf",
    "norm_pdf",
    "cosine_solution",
    "cosine_plan_values",
    "cosine_expansion_error",
    "lognormal_call",
    "lognormal_digital",
    "geometric_call_price",
    "digital_geometric_price",
    "linear_payoff_subsolution",
    "appendix_lambda2_derivative",
]


def norm_cdf(x):
    return ndtr(x)


def norm_pdf(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def _decay(t: float, lambdas: Sequence[float], subset: Iterable[int] | None) -> float:
    lam = np.asarray(lambdas, dtype=float)
    if subset is None:
        return float(np.exp(-t * lam.sum()))
    idx = [i - 1 for i in subset]
    return float(np.exp(-t * lam[idx].sum())) if idx else 1.0


def cosine_solution(z, t: float, lambdas: Sequence[float], subset: IndexSet | None = None) -> float:
    """``exp(-t sum_{k in nu} lambda_k) prod_k cos(z_k)``; ``subset=None`` means all."""
    z = np.asarray(z, dtype=float)
    return _decay(t, lambdas, subset) * float(np.prod(np.cos(z)))


def cosine_plan_values(plan: ExpansionPlan, z, t: float, lambdas: Sequence[float]) -> dict:
    return {nu: cosine_solution(z, t, lambdas, nu) for nu in plan.subsets}


def cosine_expansion_error(plan: ExpansionPlan, z, t: float, lambdas: Sequence[float]) -> float:
    """Truncation error ``u - u^xi`` for cosine data, evaluated exactly."""
    from .expansion import combine

    return cosine_solution(z, t, lambdas) - combine(plan, cosine_plan_values(plan, z, t, lambdas))


def lognormal_call(mean: float, var: float, strike: float) -> float:
    """``E[max(exp(X) - K, 0)]`` for ``X ~ N(mean, var)``."""
    if var < 0:
        raise ValidationError("variance must be nonnegative")
    if strike <= 0:
        return math.exp(mean + 0.5 * var) - strike
    if var == 0.0:
        return max(math.exp(mean) - strike, 0.0)
    s = math.sqrt(var)
    d2 = (mean - math.log(strike)) / s
    return math.exp(mean + 0.5 * var) * float(ndtr(d2 + s)) - strike * float(ndtr(d2))


def lognormal_digital(mean: float, var: float, strike: float) -> float:
    """``P[exp(X) >= K]`` for ``X ~ N(mean, var)``."""
    if var < 0:
        raise ValidationError("variance must be nonnegative")
    if strike <= 0:
        return 1.0
    if var == 0.0:
        return 1.0 if mean >= math.log(strike) else 0.0
    return float(ndtr((mean - math.log(strike)) / math.sqrt(var)))


def _log_basket_moments(model: ModelSpec, weights) -> tuple[float, float]:
    w = np.asarray(weights, dtype=float)
    if w.shape != (model.n_assets,):
        raise ValidationError(f"weights must have length {model.n_assets}")
    mean = float(w @ (np.log(model.spot) + model.drift * model.horizon))
    var = float(w @ build_covariance(model) @ w) * model.horizon
    return mean, max(var, 0.0)


def geometric_call_price(model: ModelSpec, weights, strike: float) -> float:
    """Undiscounted price of ``max(prod S_i^w_i - K, 0)`` at the horizon."""
    mean, var = _log_basket_moments(model, weights)
    return lognormal_call(mean, var, strike) * math.exp(-model.risk_free * model.horizon)


def digital_geometric_price(model: ModelSpec, weights, strike: float) -> float:
    mean, var = _log_basket_moments(model, weights)
    return lognormal_digital(mean, var, strike) * math.exp(-model.risk_free * model.horizon)


def linear_payoff_subsolution(
    kind: str,
    direction,
    anchor,
    lambdas: Sequence[float],
    t: float,
    strike: float,
    subset: IndexSet | None = None,
) -> float:
    """Sub-problem value ``u^nu(anchor, t)`` for payoffs of ``a . z``.

    ``kind`` is ``"call"`` (``max(exp(a.z) - K, 0)``) or ``"digital"``.
    Only coordinates in ``subset`` diffuse, each with variance
    ``2 lambda_k t``.
    """
    a = np.asarray(direction, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    mean = float(a @ np.asarray(anchor, dtype=float))
    idx = np.arange(len(lam)) if subset is None else np.asarray([i - 1 for i in subset], dtype=int)
    var = float(np.sum(2.0 * lam[idx] * t * a[idx] ** 2)) if idx.size else 0.0
    if kind == "call":
        return lognormal_call(mean, var, strike)
    if kind == "digital":
        return lognormal_digital(mean, var, strike)
    raise ValidationError(f"unknown payoff kind {kind!r}")


def appendix_lambda2_derivative(
    case: int,
    z,
    t: float,
    lambdas: Sequence[float],
    strike: float = 2.0,
    payoff: str = "digital",
    form: str = "derived",
) -> float:
    """``du/dlambda_2`` for the two-dimensional geometric-basket kink examples.

    The payoff is ``h(s1^m1 s2^m2)`` with ``(m1, m2) = (1, 1), (1, -1), (2, 0)``
    for cases 1, 2, 3, giving initial data in ``z1``, ``z2`` and ``z1 + z2``
    respectively. ``payoff`` selects the digital or the standard call.

    ``form="derived"`` differentiates the exact heat-equation solution.
    ``form="printed"`` returns the historical closed forms for digital case 3
    and call case 2, which do not agree with finite differences of the exact
    solution and are kept for comparison only.
    """
    if case not in (1, 2, 3):
        raise ValidationError(f"case must be 1, 2 or 3, got {case!r}")
    if payoff not in ("digital", "call"):
        raise ValidationError(f"payoff must be 'digital' or 'call', got {payoff!r}")
    if form not in ("derived", "printed"):
        raise ValidationError(f"form must be 'derived' or 'printed', got {form!r}")
    if t <= 0:
        raise ValidationError("time must be positive")
    z1, z2 = float(z[0]), float(z[1])
    lam1, lam2 = float(lambdas[0]), float(lambdas[1])
    log_k = math.log(strike)

    if case == 1:
        return 0.0

    if case == 2:
        if lam2 <= 0:
            raise ValidationError("case 2 needs lambda_2 > 0 (the lambda_2 -> 0 limit is documented, not evaluated)")
        v = 2.0 * lam2 * t
        if payoff == "digital":
            d = (z2 - log_k) / math.sqrt(v)
            return -d * float(norm_pdf(d)) / (2.0 * lam2)
        a = z2 - log_k + 2.0 * lam2 * t
        d1 = a / math.sqrt(v)
        fwd = math.exp(z2 + lam2 * t)
        if form == "printed":
            return 0.5 * t * fwd * (
                -math.exp(-a * a / (4.0 * t * lam2)) / math.sqrt(math.pi * t * lam2) + float(ndtr(d1))
            )
        return t * fwd * (float(ndtr(d1)) + float(norm_pdf(d1)) / math.sqrt(v))

    if payoff == "call":
        raise ValidationError("case 3 of the standard call has no closed form here")
    s = log_k - z1 - z2
    if form == "printed":
        if lam1 <= 0:
            raise ValidationError("printed case 3 needs lambda_1 > 0")
        total = lam1 + lam2
        return (
            s / math.sqrt(8.0 * math.pi) * math.sqrt(lam1) / total**1.5
            * math.exp(-s * s * lam2 / (4.0 * t * lam1 * total))
        )
    total = lam1 + lam2
    if total <= 0:
        raise ValidationError("case 3 needs lambda_1 + lambda_2 > 0")
    d = -s / math.sqrt(2.0 * t * total)
    return -d * float(norm_pdf(d)) / (2.0 * total)
