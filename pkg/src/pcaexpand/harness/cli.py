"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional, Sequence

import numpy as np

from ..errors import NumericalError, ValidationError
from ..expansion import format_plan, general_plan
from ..montecarlo import estimate_price, estimate_truncation_error
from ..problem import heat_problem
from .config import PRESET_CONFIGS, ExperimentConfig, load_config, preset_config
from .sweep import emit_csv, evaluate_gamma, fit_power_law, format_summary, run_sweep, write_records

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would read as a numerical failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _gamma_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="JSON file with ExperimentConfig fields")
    src.add_argument("--preset", choices=sorted(PRESET_CONFIGS))
    p.add_argument("--n-assets", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--spot", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--payoff")
    p.add_argument("--strike", type=float)
    p.add_argument("--r", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--gamma", dest="gamma_list", type=_gamma_list, help="comma-separated correlations")
    p.add_argument("--reference", choices=("oracle", "mc", "mc_coupled", "mc_conditional"))
    p.add_argument("--subsolver", choices=("pde", "oracle"))
    p.add_argument("--j-points", type=int)
    p.add_argument("--m-steps", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--samples", dest="n_samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--antithetic", action="store_true", default=None)
    p.add_argument("--lambda2-max", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--output", "-o")


_OVERRIDES = ("n_assets", "sigma", "spot", "horizon", "payoff", "strike", "r", "m", "gamma_list",
              "reference", "subsolver", "j_points", "m_steps", "kappa", "n_samples", "seed", "batch",
              "antithetic", "lambda2_max", "workers", "output")


def _config(args) -> ExperimentConfig:
    if args.config:
        base = load_config(args.config)
    elif args.preset:
        base = preset_config(args.preset)
    else:
        base = None
    changes = {k: getattr(args, k) for k in _OVERRIDES}
    if base is None:
        return ExperimentConfig(**{k: v for k, v in changes.items() if v is not None})
    return base.replace(**changes)


def cmd_plan(args) -> int:
    plan = general_plan(args.r, args.m, args.n)
    print(format_plan(plan))
    print(f"# terms={len(plan)} weight_sum={plan.weight_sum} max_dim={plan.max_dimension}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args)
    for g in cfg.gamma_list:
        rec = evaluate_gamma(cfg, g)
        print(f"gamma={rec.gamma!r} expansion={rec.expansion!r} reference={rec.reference!r} "
              f"abs_error={rec.abs_error!r} stderr={rec.stderr!r}")
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = _config(args)
    start = time.perf_counter()
    records = run_sweep(cfg)
    if cfg.output:
        emit_csv(records, cfg.output)
    else:
        write_records(records, sys.stdout)
    exponent, ci = fit_power_law(records, cfg.lambda2_max)
    print(format_summary(exponent, ci))
    print(f"# elapsed={time.perf_counter() - start:.1f}s", file=sys.stderr)
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = _config(args)
    print("gamma,target,value,stderr,n")
    for g in cfg.gamma_list:
        problem = heat_problem(cfg.model(g), cfg.payoff_spec())
        if args.target == "price":
            est = estimate_price(problem, cfg=cfg.mc)
        else:
            est = estimate_truncation_error(problem, None, general_plan(cfg.r, cfg.m, cfg.n_assets), cfg.mc)
        print(f"{g!r},{args.target},{est.mean!r},{est.stderr!r},{est.n_used}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest(verbose=not args.quiet)
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcaexpand", description="PCA-based dimension-wise expansions for basket options.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="print the expansion plan")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, required=True, help="number of dimensions")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("solve", help="expansion value and reference for each gamma")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="gamma sweep, CSV output and power-law fit")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("mc", help="Monte Carlo reference estimates")
    _add_experiment_args(p)
    p.add_argument("--target", choices=("price", "truncation"), default="price")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("selftest", help="fast oracle and invariant battery")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
