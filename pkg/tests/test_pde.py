import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcaexpand import NumericalError, ValidationError
from pcaexpand.expansion import first_order_plan
from pcaexpand.model import ModelSpec
from pcaexpand.payoff import payoff_preset
from pcaexpand.pde import (
    BACKEND,
    StretchedAxis,
    TridiagonalLU,
    choose_axes,
    evolve,
    make_subproblem,
    solve_subproblem,
    stretched_coefficients,
    thomas_solve,
)
from pcaexpand.pde.tridiag import backend_module
from pcaexpand.problem import heat_problem

BACKENDS = ["python"] + (["cython"] if BACKEND == "cython" else [])


def cosine(z):
    return np.prod(np.cos(z), axis=-1)


def observed_order(errors, ratio=2.0):
    e = np.abs(np.asarray(errors))
    return np.log(e[:-1] / e[1:]) / np.log(ratio)


# --- tridiagonal solves ------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_thomas_known_solution(backend):
    x = TridiagonalLU([1.0, 1.0], [2.0, 2.0, 2.0], [1.0, 1.0], backend=backend).solve([3.0, 4.0, 3.0])
    np.testing.assert_allclose(x, [1.0, 1.0, 1.0], atol=1e-15)


def test_thomas_identity():
    rhs = np.array([0.3, -2.0, 5.0, 1.0])
    np.testing.assert_array_equal(thomas_solve(np.zeros(3), np.ones(4), np.zeros(3), rhs), rhs)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("seed", range(5))
def test_thomas_vs_dense(backend, seed):
    rng = np.random.default_rng(seed)
    n = 50
    lo, up = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
    di = 2.1 + rng.uniform(0, 1, n)
    dense = np.diag(di) + np.diag(lo, -1) + np.diag(up, 1)
    rhs = rng.normal(size=(n, 3))
    x = TridiagonalLU(lo, di, up, backend=backend).solve(rhs)
    assert np.max(np.abs(x - np.linalg.solve(dense, rhs))) < 1e-10


def test_backends_agree_bitwise_close():
    rng = np.random.default_rng(11)
    n = 64
    lo, up = rng.uniform(-1, 0, n - 1), rng.uniform(-1, 0, n - 1)
    di = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=(n, 7))
    outs = [TridiagonalLU(lo, di, up, backend=b).solve(rhs) for b in BACKENDS]
    for o in outs[1:]:
        np.testing.assert_allclose(o, outs[0], rtol=1e-14, atol=1e-15)


def test_zero_pivot_is_numerical_error():
    with pytest.raises(NumericalError):
        TridiagonalLU([1.0], [0.0, 1.0], [1.0])


def test_unknown_backend():
    with pytest.raises(ValidationError):
        backend_module("fortran")


def test_shape_mismatch():
    with pytest.raises(ValidationError):
        TridiagonalLU([1.0, 1.0], [2.0, 2.0], [1.0])


# --- stretched grid ----------------------------------------------------------

def test_coefficients_at_centre():
    a_yy, a_y = stretched_coefficients(StretchedAxis(1.0, 0.0, 10), 0.5)
    assert a_yy == pytest.approx(1 / math.pi**2)
    assert a_y == pytest.approx(0.0, abs=1e-15)


def test_coefficients_vanish_at_ends():
    ax = StretchedAxis(1.3, 0.2, 10)
    a_yy, a_y = stretched_coefficients(ax, np.array([1e-6, 1 - 1e-6]))
    assert np.all(np.abs(a_yy) < 1e-20) and np.all(np.abs(a_y) < 1e-12)
    with pytest.raises(ValidationError):
        stretched_coefficients(ax, 0.0)


def test_derivatives_match_finite_differences():
    ax = StretchedAxis(2.0, 0.3, 10)
    y = np.random.default_rng(0).uniform(0.05, 0.95, 20)
    z = ax.to_z(y)
    h = 1e-5
    d1 = (ax.to_y(z + h) - ax.to_y(z - h)) / (2 * h)
    d2 = (ax.to_y(z + h) - 2 * ax.to_y(z) + ax.to_y(z - h)) / h**2
    a_yy, a_y = stretched_coefficients(ax, y)
    np.testing.assert_allclose(np.sqrt(a_yy), d1, rtol=1e-6)
    np.testing.assert_allclose(a_y, d2, rtol=1e-4, atol=1e-6)


def test_choose_axes_scale():
    ax = choose_axes(0.02, 1.0, 0.0)
    assert ax.b == pytest.approx(1.0)
    assert ax.c == 0.0


@settings(max_examples=30, deadline=None)
@given(anchor=st.floats(-50, 50), lam=st.floats(1e-4, 1.0))
def test_anchor_on_mid_node(anchor, lam):
    ax = choose_axes(lam, 1.0, anchor, j_points=40)
    assert ax.to_y(anchor) == pytest.approx(0.5, abs=1e-15)
    assert ax.nodes_z()[ax.mid] == anchor


def test_odd_j_rejected():
    with pytest.raises(ValidationError):
        StretchedAxis(1.0, 0.0, 11)


# --- sub-problem solves -------------------------------------------------------

def _cosine_error(dim, j, m, lam=(0.2, 0.1, 0.05), anchor=None, t=1.0):
    lam = np.asarray(lam[:dim])
    anchor = np.zeros(dim) if anchor is None else np.asarray(anchor[:dim])
    sub = make_subproblem(cosine, anchor, lam, tuple(range(1, dim + 1)), t, j_points=j, m_steps=m)
    exact = math.exp(-t * lam.sum()) * np.prod(np.cos(anchor))
    return solve_subproblem(sub) - exact


@pytest.mark.parametrize("dim, levels", [
    (1, [(50, 6), (100, 12), (200, 24)]),
    (2, [(50, 6), (100, 12), (200, 24)]),
    (3, [(24, 4), (48, 8), (96, 16)]),
])
def test_second_order_convergence(dim, levels):
    errs = [_cosine_error(dim, j, m) for j, m in levels]
    orders = observed_order(errs)
    assert np.all((orders > 1.7) & (orders < 2.3)), (errs, orders)


def test_offset_anchor_converges():
    anchor = np.array([0.4, -0.7])
    errs = [_cosine_error(2, j, m, anchor=anchor) for j, m in [(50, 6), (100, 12), (200, 24)]]
    assert abs(errs[-1]) < 1e-4
    assert np.all(observed_order(errs) > 1.7)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_constant_is_preserved(dim):
    sub = make_subproblem(lambda z: np.full(z.shape[:-1], 3.7), np.zeros(dim), [0.2, 0.1, 0.05][:dim],
                          tuple(range(1, dim + 1)), 1.0, j_points=20, m_steps=5)
    seen = []
    evolve(sub, callback=lambda step, u: seen.append(np.max(np.abs(u - 3.7))))
    assert len(seen) == 6 and max(seen) < 1e-13


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_maximum_principle_cosine(dim):
    sub = make_subproblem(cosine, np.zeros(dim), [0.2, 0.1, 0.05][:dim], tuple(range(1, dim + 1)), 1.0,
                          j_points=40, m_steps=8)
    lo, hi = np.inf, -np.inf

    def track(step, u):
        nonlocal lo, hi
        lo, hi = min(lo, u.min()), max(hi, u.max())

    evolve(sub, callback=track)
    assert lo >= -1 - 1e-12 and hi <= 1 + 1e-12


@pytest.mark.parametrize("subset", [(1,), (1, 2), (1, 2, 3)])
def test_maximum_principle_basket(subset):
    model = ModelSpec(n_assets=10, sigma=[0.2] * 10, gamma=0.5)
    prob = heat_problem(model, payoff_preset("arith-omega1"))
    j = 200 if len(subset) < 3 else 40
    sub = make_subproblem(prob.g, prob.anchor, prob.lambdas, subset, 1.0, j_points=j, m_steps=12,
                          cutoff=prob.cutoff)
    ranges = []
    evolve(sub, callback=lambda step, u: ranges.append((u.min(), u.max())))
    (gmin, gmax), later = ranges[0], ranges[1:]
    # payoff values reach the cutoff (1000), so allow 1e-12 relative to that scale
    tol = 1e-12 * max(1.0, abs(gmin), abs(gmax))
    assert min(lo for lo, _ in later) >= gmin - tol
    assert max(hi for _, hi in later) <= gmax + tol


def test_anchor_value_is_grid_value():
    anchor = np.array([0.3, -0.2])
    sub = make_subproblem(cosine, anchor, [0.2, 0.1], (1, 2), 1.0, j_points=60, m_steps=10)
    u = evolve(sub)
    assert solve_subproblem(sub) == u[30, 30]


def test_zero_horizon_returns_initial():
    anchor = np.array([0.3])
    sub = make_subproblem(cosine, anchor, [0.2], (1,), 0.0, j_points=20, m_steps=4)
    assert solve_subproblem(sub) == pytest.approx(math.cos(0.3), abs=1e-15)


def test_empty_subset_is_initial_value():
    anchor = np.array([0.3, 0.1])
    sub = make_subproblem(cosine, anchor, [0.2, 0.1], (), 1.0)
    assert solve_subproblem(sub) == pytest.approx(math.cos(0.3) * math.cos(0.1))


def test_zero_diffusion_direction_dropped():
    sub = make_subproblem(cosine, np.zeros(3), [0.2, 0.0, 0.1], (1, 2, 3), 1.0, j_points=20)
    assert sub.subset == (1, 3)


def test_four_dimensions_rejected():
    with pytest.raises(ValidationError):
        make_subproblem(cosine, np.zeros(4), [0.1] * 4, (1, 2, 3, 4), 1.0, j_points=10)


def test_unbounded_payoff_needs_cutoff():
    model = ModelSpec(n_assets=2, sigma=[0.2, 0.2], gamma=0.5)
    prob = heat_problem(model, payoff_preset("arith5-omega1").__class__(
        "arithmetic_basket_call", weights=(0.5, 0.5), strike=100.0))
    assert prob.cutoff == pytest.approx(1000.0)
    sub = make_subproblem(prob.g, prob.anchor, prob.lambdas, (1, 2), 1.0, j_points=40, m_steps=8,
                          cutoff=prob.cutoff)
    assert np.isfinite(solve_subproblem(sub))


def test_backend_choice_does_not_change_solution(monkeypatch):
    import pcaexpand.pde.tridiag as tri

    if BACKEND != "cython":
        pytest.skip("compiled backend not built")
    sub = make_subproblem(cosine, np.zeros(2), [0.2, 0.1], (1, 2), 1.0, j_points=60, m_steps=8)
    fast = solve_subproblem(sub)
    monkeypatch.setattr(tri, "_backend", backend_module("python"))
    slow = solve_subproblem(sub)
    assert fast == pytest.approx(slow, abs=1e-14)


def test_plan_terms_solve_first_order():
    from pcaexpand.approximate import Resolution, expansion_value, pde_term_solver
    from pcaexpand.oracle import cosine_plan_values
    from pcaexpand.expansion import combine
    from pcaexpand.problem import HeatProblem

    lam = np.array([0.2, 0.03, 0.02])
    anchor = np.array([0.1, 0.2, -0.3])
    prob = HeatProblem(lam, anchor, 1.0, cosine)
    plan = first_order_plan(1, 3)
    value, _ = expansion_value(plan, pde_term_solver(prob, Resolution(200, 24)), workers=2)
    exact = combine(plan, cosine_plan_values(plan, anchor, 1.0, lam))
    assert abs(value - exact) < 1e-4
