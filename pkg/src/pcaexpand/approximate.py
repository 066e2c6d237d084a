"""Evaluate a truncated expansion by solving its sub-problems."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NumericalError, ValidationError
from .expansion import ExpansionPlan, IndexSet, combine
from .oracle import cosine_solution, linear_payoff_subsolution
from .pde import DEFAULT_KAPPA, make_subproblem, solve_subproblem
from .problem import HeatProblem

__all__ = ["Resolution", "pde_term_solver", "oracle_term_solver", "solve_terms", "expansion_value"]

TermSolver = Callable[[IndexSet], float]


@dataclass(frozen=True)
class Resolution:
    """Mesh intervals per axis and number of time steps."""

    j_points: int = 200
    m_steps: int = 12
    kappa: float = DEFAULT_KAPPA


def pde_term_solver(problem: HeatProblem, resolution: Resolution = Resolution()) -> TermSolver:
    def solve(nu: IndexSet) -> float:
        sub = make_subproblem(problem.g, problem.anchor, problem.lambdas, nu, problem.horizon,
                              resolution.j_points, resolution.m_steps, resolution.kappa, problem.cutoff)
        return solve_subproblem(sub)

    return solve


def oracle_term_solver(problem: HeatProblem, payoff) -> TermSolver:
    """Closed-form sub-solutions for cosine and geometric-basket payoffs."""
    if payoff.kind == "cosine_product":
        def solve(nu):
            return cosine_solution(problem.anchor, problem.horizon, problem.lambdas, nu)
        return solve
    if payoff.kind in ("geometric_basket_call", "digital_geometric_call"):
        if problem.spectrum is None:
            raise ValidationError("geometric oracle needs the problem's spectrum")
        direction = np.asarray(problem.spectrum.q_matrix).T @ np.asarray(payoff.weights)
        kind = "call" if payoff.kind == "geometric_basket_call" else "digital"

        def solve(nu):
            return linear_payoff_subsolution(kind, direction, problem.anchor, problem.lambdas,
                                             problem.horizon, payoff.strike, nu)
        return solve
    raise ValidationError(f"no closed-form sub-solutions for payoff kind {payoff.kind!r}")


def solve_terms(plan: ExpansionPlan, solver: TermSolver, workers: int = 1) -> dict:
    """Solve every subset of ``plan``; results do not depend on ``workers``."""
    subsets = plan.subsets

    def run(nu):
        try:
            return solver(nu)
        except (ValidationError, NumericalError):
            raise
        except Exception as exc:  # surface the failing term
            raise NumericalError(f"sub-problem {set(nu)} failed: {exc}") from exc

    if workers > 1 and len(subsets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, subsets))
    else:
        values = [run(nu) for nu in subsets]
    for nu, v in zip(subsets, values):
        if not np.isfinite(v):
            raise NumericalError(f"sub-problem {set(nu)} returned a non-finite value")
    return dict(zip(subsets, values))


def expansion_value(plan: ExpansionPlan, solver: TermSolver, workers: int = 1) -> tuple[float, dict]:
    values = solve_terms(plan, solver, workers)
    return combine(plan, values), values
