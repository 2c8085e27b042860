"""Command-line front end.

Three subcommands drive the library: ``sweep`` evaluates the analytic risks
over a regularization grid and writes a CSV (optionally an SVG figure),
``verify`` appends Monte Carlo estimates and checks them against the analytic
values, and ``certify`` reports the worst observed risk-inflation ratios and
fails if the factor-4 bound is ever exceeded.

Exit codes: 0 success, 1 verification or bound failure, 2 config error,
3 output write failure.
"""

import argparse
import sys

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .model import eigendecompose, rotate_problem, second_moment
from .montecarlo import NoiseModel, empirical_sweep
from .report import (
    VerifiedRow,
    format_value,
    render_risk_curves,
    sweep_csv,
    verify_csv,
)
from .risk import BOUND_TOLERANCE, RISK_INFLATION_BOUND, inflation_certificate, lambda_sweep
from .scenarios import scenario_grid

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3

# Slack when comparing a Monte Carlo mean to its analytic value: four standard
# errors plus a relative floor covering the zero-noise case, where the standard
# error is exactly zero but the two computations round differently.
AGREE_STD_ERRORS = 4.0
AGREE_RTOL = 1e-9

DEFAULT_BATTERY_SEED = 20240801


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _rotated(config: ExperimentConfig):
    instance = config.instance
    spectrum = eigendecompose(second_moment(instance))
    return rotate_problem(instance, spectrum)


def cmd_sweep(args) -> int:
    try:
        config = load_config(args.config, seed_override=args.seed)
        result = lambda_sweep(_rotated(config), config.lambdas)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    csv_path = args.out if args.out is not None else config.output.csv_path
    plot_path = args.plot if args.plot is not None else config.output.plot_path
    try:
        _write_text(csv_path, sweep_csv(result.rows))
        if plot_path is not None:
            render_risk_curves(result.rows, plot_path)
    except OSError as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _agrees(empirical, analytic: float) -> bool:
    slack = AGREE_STD_ERRORS * empirical.std_error + AGREE_RTOL * max(1.0, abs(analytic))
    return abs(empirical.mean - analytic) <= slack


def cmd_verify(args) -> int:
    try:
        config = load_config(args.config, seed_override=args.seed)
        if config.monte_carlo is None or not config.monte_carlo.enabled:
            raise ConfigError("verify requires an enabled 'monte_carlo' block")
        mc = config.monte_carlo
        noise = NoiseModel(mc.noise_kind, config.instance.noise_variance)
        result = lambda_sweep(_rotated(config), config.lambdas)
        estimates = empirical_sweep(
            config.instance, config.lambdas, noise, mc.trials, mc.seed
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = []
    all_agree = True
    for base, (ridge_est, pca_est) in zip(result.rows, estimates):
        agrees = _agrees(ridge_est, base.ridge_risk) and _agrees(pca_est, base.pca_risk)
        all_agree = all_agree and agrees
        rows.append(VerifiedRow(base, ridge_est, pca_est, agrees))

    csv_path = args.out if args.out is not None else config.output.csv_path
    plot_path = args.plot if args.plot is not None else config.output.plot_path
    try:
        _write_text(csv_path, verify_csv(rows))
        if plot_path is not None:
            render_risk_curves([row.base for row in rows], plot_path)
    except OSError as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if all_agree else EXIT_FAILED


def _certify_cases(args):
    if args.battery:
        seed = args.seed if args.seed is not None else DEFAULT_BATTERY_SEED
        for index, (instance, lambdas) in enumerate(scenario_grid(seed)):
            yield f"battery[{index}]", instance, lambdas
    else:
        config = load_config(args.config, seed_override=args.seed)
        yield "config instance", config.instance, config.lambdas


def cmd_certify(args) -> int:
    try:
        if not args.battery and args.config is None:
            raise ConfigError("certify needs a config path unless --battery is given")
        cases = list(_certify_cases(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    worst_overall = (-np.inf, None, None)
    worst_term = (-np.inf, None, None)
    worst_case = None
    checked = 0
    all_hold = True
    limit = RISK_INFLATION_BOUND + BOUND_TOLERANCE
    for label, instance, lambdas in cases:
        rotated = rotate_problem(instance, eigendecompose(second_moment(instance)))
        for lam in np.asarray(lambdas, dtype=float):
            cert = inflation_certificate(rotated, lam)
            checked += 1
            if cert.overall_ratio > worst_overall[0]:
                worst_overall = (cert.overall_ratio, lam, label)
                worst_case = (rotated, np.asarray(lambdas, dtype=float))
            if cert.max_term_ratio > worst_term[0]:
                worst_term = (cert.max_term_ratio, lam, label)
            all_hold = all_hold and cert.bound_holds and cert.max_term_ratio <= limit

    lines = [
        f"checked {checked} (instance, lambda) pairs against the bound "
        f"{RISK_INFLATION_BOUND:g}",
        f"worst overall ratio: {format_value(worst_overall[0])} "
        f"at lambda={format_value(worst_overall[1])} ({worst_overall[2]})",
        f"worst per-term ratio: {format_value(worst_term[0])} "
        f"at lambda={format_value(worst_term[1])} ({worst_term[2]})",
        f"bound holds: {'yes' if all_hold else 'NO'}",
    ]
    text = "\n".join(lines) + "\n"
    try:
        _write_text(args.out, text)
        if args.plot is not None and worst_case is not None:
            # the case achieving the worst overall ratio, swept over its grid
            render_risk_curves(lambda_sweep(*worst_case).rows, args.plot)
    except OSError as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if all_hold else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridgepca",
        description=(
            "Compare the exact risk of ridge regression and PCA-truncated least "
            "squares on a fixed design, and verify the factor-4 inflation bound."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("config", help="path to a JSON experiment config")
        else:
            p.add_argument("config", nargs="?", default=None, help="path to a JSON config")
        p.add_argument("--out", default=None, help="output path (default: config or stdout)")
        p.add_argument("--plot", default=None, help="also render an SVG figure here")
        p.add_argument("--seed", type=int, default=None, help="override every config seed")

    sweep = sub.add_parser("sweep", help="analytic risk sweep to CSV (and optional SVG)")
    common(sweep)
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="sweep plus Monte Carlo agreement columns")
    common(verify)
    verify.set_defaults(func=cmd_verify)

    certify = sub.add_parser("certify", help="report worst inflation ratios")
    common(certify, config_required=False)
    certify.add_argument(
        "--battery",
        action="store_true",
        help="run the built-in scenario battery instead of a config instance",
    )
    certify.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
