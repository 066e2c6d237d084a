"""A fast battery of oracle and invariant checks (seconds, no large runs)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..expansion import first_order_plan, general_plan, second_order_plan
from ..model import ModelSpec
from ..montecarlo import MCConfig, estimate_price
from ..oracle import cosine_expansion_error, cosine_solution, geometric_call_price
from ..payoff import PayoffSpec
from ..pde import BACKEND, make_subproblem, solve_subproblem, thomas_solve
from .sweep import power_law_fit


def _cosine(z):
    return np.prod(np.cos(z), axis=-1)


def _check_plans() -> str:
    for n in range(2, 9):
        for r in range(1, n):
            for m in range(0, n - r + 1):
                if general_plan(r, m, n).weight_sum != 1:
                    raise AssertionError(f"weight sum != 1 at (r={r}, m={m}, n={n})")
            if general_plan(r, 1, n) != first_order_plan(r, n):
                raise AssertionError(f"general != first-order plan at (r={r}, n={n})")
            if r + 2 <= n and general_plan(r, 2, n) != second_order_plan(r, n):
                raise AssertionError(f"general != second-order plan at (r={r}, n={n})")
    return "plans sum to 1 and match the specialized forms"


def _check_thomas() -> str:
    rng = np.random.default_rng(1)
    n = 50
    lo, up = rng.uniform(-1, 0, n - 1), rng.uniform(-1, 0, n - 1)
    di = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=n)
    dense = np.diag(di) + np.diag(lo, -1) + np.diag(up, 1)
    err = np.max(np.abs(thomas_solve(lo, di, up, rhs) - np.linalg.solve(dense, rhs)))
    if err > 1e-10:
        raise AssertionError(f"Thomas vs dense {err:.2e}")
    return f"Thomas vs dense {err:.1e} (backend {BACKEND})"


def _check_pde() -> str:
    lam = np.array([0.2, 0.1])
    sub = make_subproblem(_cosine, np.zeros(2), lam, (1, 2), 1.0, j_points=100, m_steps=12)
    err = abs(solve_subproblem(sub) - cosine_solution(np.zeros(2), 1.0, lam))
    if err > 1e-3:
        raise AssertionError(f"2D PDE error {err:.2e}")
    return f"2D cosine PDE error {err:.1e}"


def _check_cosine_expansion() -> str:
    lam = np.array([0.3, 0.02, 0.015, 0.01])
    z = np.array([0.1, -0.2, 0.3, 0.05])
    got = cosine_expansion_error(first_order_plan(1, 4), z, 1.0, lam)
    tail = np.exp(-lam[1:])
    want = math.exp(-lam[0]) * (np.prod(tail) - 1 - np.sum(tail - 1)) * np.prod(np.cos(z))
    if abs(got - want) > 1e-12:
        raise AssertionError(f"cosine expansion error mismatch {got} vs {want}")
    return "cosine expansion error matches its closed form"


def _check_mc() -> str:
    model = ModelSpec(n_assets=4, sigma=[0.2] * 4, gamma=0.5)
    payoff = PayoffSpec("geometric_basket_call", weights=(0.25,) * 4, strike=100.0)
    est = estimate_price(model, payoff, MCConfig(n_samples=200_000, seed=7))
    ref = geometric_call_price(model, payoff.weights, payoff.strike)
    if abs(est.mean - ref) > 4 * est.stderr:
        raise AssertionError(f"MC {est.mean:.4f} +- {est.stderr:.4f} vs oracle {ref:.4f}")
    return f"MC geometric call {est.mean:.4f} +- {est.stderr:.4f}, oracle {ref:.4f}"


def _check_fit() -> str:
    p, ci = power_law_fit([1, 2, 4], [1, 4, 16])
    if abs(p - 2) > 1e-12 or ci > 1e-9:
        raise AssertionError(f"fit of exact quadratic gave {p}, {ci}")
    return "power-law fit recovers an exact quadratic"


CHECKS: list[tuple[str, Callable[[], str]]] = [
    ("plans", _check_plans),
    ("thomas", _check_thomas),
    ("pde", _check_pde),
    ("cosine", _check_cosine_expansion),
    ("mc", _check_mc),
    ("fit", _check_fit),
]


def run_selftest(verbose: bool = True) -> int:
    """Run all checks; returns the number of failures."""
    failures = 0
    for name, check in CHECKS:
        try:
            msg = check()
            ok = True
        except Exception as exc:  # report and continue
            msg, ok = f"{type(exc).__name__}: {exc}", False
        failures += not ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {msg}")
    return failures
