"""Command-line interface.

Exit status: 0 on success, 2 when ``test`` rejects normality, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .asymptotics import ShiftContext, cell_shift_vector, level_from_lambda2, noncentrality_spec
from .edf import Partition, default_partition
from .errors import SymPearsonError
from .estimation import estimator_from_name
from .laws import (
    LaplaceInnovation,
    LogisticInnovation,
    NormalInnovation,
    StudentTInnovation,
    outlier_from_dict,
    parse_outlier,
)
from .montecarlo import ExperimentSpec, load_config, robustness_sweep, run_expansion_check, run_level_experiment
from .pearson import run_test
from .timeseries import ArModel, ContaminationSpec, SeriesSample, contaminate, simulate_clean

EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the rejection exit status
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _innovation(text: str, theta: float):
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "normal":
        return NormalInnovation(theta)
    if name == "laplace":
        return LaplaceInnovation(theta)
    if name == "logistic":
        return LogisticInnovation(theta)
    if name in ("t", "student_t"):
        return StudentTInnovation(float(arg or 5.0), theta)
    raise SymPearsonError(f"unknown innovation law {text!r}")


def _partition(path: str | None, m: int) -> Partition:
    if path is None:
        return default_partition(m)
    return Partition.from_json(Path(path).read_text())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_simulate(args) -> int:
    model = ArModel(tuple(_floats(args.model_beta)), args.mu, _innovation(args.innovation, args.theta))
    seeds = np.random.SeedSequence(args.seed).spawn(2)
    clean = simulate_clean(model, args.n, seeds[0])
    sample = contaminate(clean, ContaminationSpec(args.gamma, parse_outlier(args.pi)), seeds[1])
    _emit(sample.to_csv(), args.out)
    return EXIT_OK


def _cmd_test(args) -> int:
    sample = SeriesSample.from_csv(args.input, args.p)
    part = Partition.from_json(Path(args.partition).read_text()) if args.partition else None
    report = run_test(sample, args.p, estimator_from_name(args.estimator, args.huber_k), part, args.alpha, args.m)
    _emit(report.to_json(indent=2) + "\n", args.out)
    return EXIT_REJECT if report.reject else EXIT_OK


def _spec_from_args(args) -> ExperimentSpec:
    spec = ExperimentSpec.from_file(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["replications"] = args.reps
    if args.n is not None:
        overrides["n"] = args.n
    return replace(spec, **overrides) if overrides else spec


def _cmd_mc_level(args) -> int:
    result = run_level_experiment(_spec_from_args(args), workers=args.workers)
    if args.samples_out:
        Path(args.samples_out).write_text(result.statistics_csv())
    _emit(result.to_json(indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_expansion(args) -> int:
    spec = _spec_from_args(args)
    grid = _floats(args.x_grid) if args.x_grid else load_config(args.config).get("x_grid", [0.5, 1.0, 1.5, 2.0])
    table = run_expansion_check(spec, grid, workers=args.workers)
    out = table.to_dict()
    out["spec"] = spec.to_dict()
    out["within_3se"] = table.within(3.0).tolist()
    _emit(_dump(out), args.out)
    return EXIT_OK


def _cmd_theory(args) -> int:
    part = _partition(args.partition, args.m)
    ctx = ShiftContext(tuple(_floats(args.model_beta)), args.theta, parse_outlier(args.pi))
    ns = noncentrality_spec(part, ctx, cell_shift_vector(part, ctx))
    df = part.m - 2
    if args.curve:
        lines = ["gamma,level"]
        for g in _floats(args.curve):
            lines.append(f"{g!r},{level_from_lambda2(ns.lambda2(g), args.alpha, df)!r}")
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    lam2 = ns.lambda2(args.gamma) if args.gamma else 0.0
    out = {
        "gamma": args.gamma,
        "lambda2": lam2,
        "asymptotic_level": level_from_lambda2(lam2, args.alpha, df),
        "alpha": args.alpha,
        "delta": ns.delta.tolist(),
        "partition": list(part.interior),
    }
    _emit(_dump(out), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    cfg = load_config(args.config)
    gammas = cfg.get("gammas", [1.0, 0.5, 0.25, 0.1, 0.0])
    pis = [parse_outlier(p) if isinstance(p, str) else outlier_from_dict(p) for p in cfg.get("pis", ["pointmass:5"])]
    result = robustness_sweep(spec, gammas, pis, workers=args.workers, empirical=not args.theory_only)
    if args.curve_out:
        Path(args.curve_out).write_text(result.curve_csv())
    _emit(_dump(result.to_dict()), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sympearson", description="Symmetrized Pearson normality test for AR(p) with outliers")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed_default=None):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", help="write output here instead of stdout")

    def model_args(p):
        p.add_argument("--model-beta", default="", help="comma-separated AR coefficients")
        p.add_argument("--theta", type=float, default=1.0, help="innovation scale")
        p.add_argument("--pi", default="pointmass:0", help="outlier law, e.g. pointmass:5, normal:0,3, cauchy:0,1")

    p = sub.add_parser("simulate", help="simulate a contaminated AR(p) series as CSV")
    model_args(p)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--innovation", default="normal", help="normal | laplace | logistic | t:DF")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    common(p, seed_default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("test", help="run the test on a series CSV")
    p.add_argument("input")
    p.add_argument("--p", type=int, required=True, help="AR order; the first p rows are pre-sample values")
    p.add_argument("--estimator", default="huber", choices=["huber", "ls"])
    p.add_argument("--huber-k", type=float, default=1.345)
    p.add_argument("--partition", help="JSON array of finite cell boundaries (default: MAD-scaled normal quantiles)")
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--alpha", type=float, default=0.05)
    common(p)
    p.set_defaults(func=_cmd_test)

    for name, func, hlp in [
        ("mc-level", _cmd_mc_level, "Monte Carlo level experiment from a JSON/TOML config"),
        ("expansion-check", _cmd_expansion, "Monte Carlo check of the symmetrized e.d.f. drift"),
        ("robustness-sweep", _cmd_sweep, "level over a grid of gamma and outlier laws"),
    ]:
        p = sub.add_parser(name, help=hlp)
        p.add_argument("config")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--reps", type=int)
        p.add_argument("--n", type=int)
        common(p)
        p.set_defaults(func=func)
        if name == "mc-level":
            p.add_argument("--samples-out", help="CSV of statistic samples")
        elif name == "expansion-check":
            p.add_argument("--x-grid", help="comma-separated evaluation points")
        else:
            p.add_argument("--theory-only", action="store_true")
            p.add_argument("--curve-out", help="CSV of (gamma, worst-case level)")

    p = sub.add_parser("theory", help="noncentrality and asymptotic level")
    model_args(p)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--partition")
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--curve", help="comma-separated gammas; emit CSV rows gamma,level")
    common(p)
    p.set_defaults(func=_cmd_theory)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SymPearsonError, OSError, ValueError, KeyError) as exc:
        print(f"sympearson {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
