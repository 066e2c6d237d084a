from .grid import DEFAULT_KAPPA, StretchedAxis, choose_axes, stretched_coefficients
from .solver import SubProblem, evolve, make_subproblem, restrict, solve_subproblem
from .tridiag import BACKEND, TridiagonalLU, thomas_solve

__all__ = [
    "BACKEND",
    "DEFAULT_KAPPA",
    "StretchedAxis",
    "SubProblem",
    "TridiagonalLU",
    "choose_axes",
    "evolve",
    "make_subproblem",
    "restrict",
    "solve_subproblem",
    "stretched_coefficients",
    "thomas_solve",
]
