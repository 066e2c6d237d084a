"""Compare the compiled and numpy tridiagonal backends.

Times repeated solves with a cached factorization (the inner loop of every
ADI half-step) and one full 2D sub-problem solve per backend.

    python benchmarks/bench_tridiag.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

import pcaexpand.pde.tridiag as tri
from pcaexpand.pde import BACKEND, TridiagonalLU, make_subproblem, solve_subproblem


def kernel_case(n: int, cols: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    lo, up = rng.uniform(-1, 0, n - 1), rng.uniform(-1, 0, n - 1)
    di = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=(n, cols)) if cols > 1 else rng.normal(size=n)
    return lo, di, up, rhs


def time_kernel(backend: str, n: int, cols: int, repeat: int) -> float:
    lo, di, up, rhs = kernel_case(n, cols)
    lu = TridiagonalLU(lo, di, up, backend=backend)
    number = max(1, 20_000 // (n * cols))
    return min(timeit.repeat(lambda: lu.solve(rhs), number=number, repeat=repeat)) / number


def time_subproblem(backend: str, j_points: int, m_steps: int, repeat: int) -> float:
    sub = make_subproblem(lambda z: np.prod(np.cos(z), axis=-1), np.zeros(2), [0.2, 0.1], (1, 2), 1.0,
                          j_points=j_points, m_steps=m_steps)
    saved = tri._backend
    tri._backend = tri.backend_module(backend)
    try:
        return min(timeit.repeat(lambda: solve_subproblem(sub), number=1, repeat=repeat))
    finally:
        tri._backend = saved


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if BACKEND != "cython":
        print("compiled backend not built; only the numpy fallback is available")
        return
    print(f"{'case':<28}{'python':>12}{'cython':>12}{'speedup':>10}")
    for n, cols in ((201, 1), (201, 201), (1001, 1), (101, 10201)):
        py = time_kernel("python", n, cols, args.repeat)
        cy = time_kernel("cython", n, cols, args.repeat)
        print(f"{f'solve n={n} rhs={cols}':<28}{py * 1e6:>10.1f}us{cy * 1e6:>10.1f}us{py / cy:>9.1f}x")
    for j, m in ((100, 12), (200, 12)):
        py = time_subproblem("python", j, m, args.repeat)
        cy = time_subproblem("cython", j, m, args.repeat)
        print(f"{f'2D sub-problem J={j} M={m}':<28}{py * 1e3:>10.1f}ms{cy * 1e3:>10.1f}ms{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
