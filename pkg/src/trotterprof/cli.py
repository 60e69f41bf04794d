"""Command-line driver.

Subcommands: ``run`` (trotter/ep/mpf error curves), ``profile`` (single-time
sweep plus fit report), ``mpf`` (extrapolation curve plus weights),
``calibrate`` (basis report), ``slope`` (log-log gradients), and ``cost``
(circuit accounting).  Configs come from ``--config FILE`` or
``--preset NAME``; results are written atomically as CSV.  Exit codes:
0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Sequence

from ._version import __version__
from .config import (
    ConfigDocument,
    PRESETS,
    base_metadata,
    parse_document,
    preset_config,
)
from .errors import (
    CalibrationError,
    ConfigError,
    ExtractionError,
    SingularFitError,
    TrotterProfError,
)
from .experiments import (
    METHODS,
    ExperimentConfig,
    circuit_cost,
    profiling_setup,
    run_error_curve,
    slope_fit,
)
from .mpf import mpf_weights
from .profiling import default_a_grid, fit_profile, profile_sweep, resolve_basis
from .report import ResultRow, ResultTable, atomic_write_text, write_csv
from .simulator import exact_evolve, expectation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

_NUMERIC_ERRORS = (SingularFitError, CalibrationError, ExtractionError)


class _CliParser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as config errors."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise ConfigError(message, "usage")


def _build_parser() -> _CliParser:
    parser = _CliParser(prog="trotterprof", description=__doc__)
    parser.add_argument("--version", action="version", version=f"trotterprof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to a JSON config document")
        p.add_argument("--preset", help=f"built-in setup, one of {', '.join(PRESETS)}")
        p.add_argument("--out", help="output CSV path (overrides the config)")
        p.add_argument("--seed", type=int, help="override the noise seed")
        p.add_argument(
            "--method",
            help="comma-separated subset of trotter,ep,mpf (default: all)",
        )

    run_p = sub.add_parser("run", help="error curves for every requested method")
    common(run_p)

    profile_p = sub.add_parser("profile", help="sweep the split parameter at one time")
    common(profile_p)
    profile_p.add_argument(
        "--time", type=float, help="evaluation time (default: largest configured time)"
    )

    mpf_p = sub.add_parser("mpf", help="multi-product curve and weight report")
    common(mpf_p)

    cal_p = sub.add_parser("calibrate", help="report the calibrated fit basis")
    common(cal_p)

    slope_p = sub.add_parser("slope", help="log-log error gradients per method")
    common(slope_p)
    slope_p.add_argument(
        "--window",
        nargs=2,
        type=float,
        metavar=("TMIN", "TMAX"),
        default=(0.1, 0.5),
        help="time window for the gradient fit (default 0.1 0.5)",
    )

    cost_p = sub.add_parser("cost", help="circuit and gate accounting")
    common(cost_p)
    cost_p.add_argument("--steps", type=int, default=1, help="base Trotter depth N")
    cost_p.add_argument("--grid", type=int, default=None, help="profiling grid size")

    return parser


def _load_document(args: argparse.Namespace) -> ConfigDocument:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both", "usage")
    if args.config:
        try:
            with open(args.config, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", "config") from exc
        doc = parse_document(text)
    elif args.preset:
        doc = ConfigDocument(preset_config(args.preset))
    else:
        raise ConfigError("one of --config or --preset is required", "usage")
    cfg = doc.experiment
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return ConfigDocument(cfg, doc.output_path, doc.output_format)


def _methods(args: argparse.Namespace) -> tuple[str, ...]:
    if not getattr(args, "method", None):
        return METHODS
    picked = tuple(m.strip() for m in args.method.split(",") if m.strip())
    for m in picked:
        if m not in METHODS:
            raise ConfigError(
                f"unknown method {m!r}; choose from {', '.join(METHODS)}", "method"
            )
    if not picked:
        raise ConfigError("empty --method list", "method")
    return picked


def _out_path(args: argparse.Namespace, doc: ConfigDocument) -> str | None:
    return args.out or doc.output_path


def _steps_label(cfg: ExperimentConfig, method: str) -> int:
    if method == "mpf":
        return max(cfg.mpf.step_counts)
    return cfg.profiling.trotter_steps


def _cmd_run(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    cfg = doc.experiment
    rows = []
    for method in _methods(args):
        curve = run_error_curve(cfg, method)
        label = _steps_label(cfg, method)
        rows.extend(
            ResultRow(method, p.t, label, p.estimate, p.exact, p.abs_error)
            for p in curve.points
        )
    table = ResultTable.from_rows(rows, base_metadata(cfg))
    path = _out_path(args, doc)
    if path:
        write_csv(table, path)
        print(f"wrote {len(table.rows)} rows to {path}")
    else:
        for row in table.rows:
            print(
                f"{row.method:8s} t={row.t:<10.6g} estimate={row.estimate:+.12g}"
                f" exact={row.exact:+.12g} abs_error={row.abs_error:.3e}"
            )
    return EXIT_OK


def _cmd_profile(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    cfg = doc.experiment
    t = args.time if args.time is not None else cfg.times[-1]
    if t <= 0:
        raise ConfigError("--time must be positive", "time")
    profile_cfg = profiling_setup(cfg)
    basis = resolve_basis(profile_cfg)
    grid = (
        profile_cfg.a_grid
        if profile_cfg.a_grid is not None
        else default_a_grid(len(basis.orders))
    )
    samples = profile_sweep(
        grid,
        t,
        cfg.formula,
        cfg.partition,
        cfg.observable,
        cfg.initial_state,
        cfg.profiling.trotter_steps,
    )
    fit = fit_profile(samples, basis, cfg.formula.alpha)
    exact = expectation(exact_evolve(cfg.partition.hamiltonian, t, cfg.initial_state), cfg.observable)

    print(f"time {t}")
    print(f"basis orders {list(basis.orders)} antisymmetric {basis.include_antisymmetric}")
    print(f"mitigated estimate {fit.y_star:+.12g}   exact {exact:+.12g}")
    print(f"abs error {abs(fit.y_star - exact):.3e}")
    print(f"residual norm {fit.residual_norm:.3e}   condition number {fit.condition_number:.3e}")
    for order, value in fit.coefficients.items():
        print(f"  m[{order}] = {value:+.6e}")
    for order, value in fit.antisymmetric_coefficients.items():
        print(f"  m_odd[{order}] = {value:+.6e}")

    path = _out_path(args, doc)
    if path:
        rows = [
            ResultRow("profile-sample", t, s.a, s.value, exact, abs(s.value - exact))
            for s in samples
        ]
        rows.append(
            ResultRow("ep", t, cfg.profiling.trotter_steps, fit.y_star, exact, abs(fit.y_star - exact))
        )
        write_csv(ResultTable.from_rows(rows, base_metadata(cfg)), path)
        print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def _cmd_mpf(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    cfg = doc.experiment
    weights = mpf_weights(cfg.mpf.step_counts, cfg.formula.alpha, cfg.mpf.symmetric)
    print(f"step counts {list(weights.step_counts)}")
    print(f"weights     {[round(w, 12) for w in weights.weights]}")
    print(f"cancelled orders {list(weights.cancelled_orders)}")
    print(f"condition number {weights.condition_number:.3e}"
          + ("  (ill-conditioned)" if weights.ill_conditioned else ""))
    curve = run_error_curve(cfg, "mpf")
    label = max(cfg.mpf.step_counts)
    rows = [
        ResultRow("mpf", p.t, label, p.estimate, p.exact, p.abs_error)
        for p in curve.points
    ]
    path = _out_path(args, doc)
    if path:
        write_csv(ResultTable.from_rows(rows, base_metadata(cfg)), path)
        print(f"wrote {len(rows)} rows to {path}")
    else:
        for row in rows:
            print(f"t={row.t:<10.6g} estimate={row.estimate:+.12g} abs_error={row.abs_error:.3e}")
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    cfg = doc.experiment
    basis = resolve_basis(profiling_setup(cfg))
    print(f"surviving orders {list(basis.orders)}")
    print(f"antisymmetric columns {basis.include_antisymmetric}")
    print(f"suggested grid size {2 * len(basis.orders) + 1}")
    path = _out_path(args, doc)
    if path:
        rows = [
            ResultRow("calibrate", 0.0, order, 1.0, 1.0, 0.0) for order in basis.orders
        ]
        write_csv(ResultTable.from_rows(rows, base_metadata(cfg)), path)
        print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def _cmd_slope(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    cfg = doc.experiment
    window = (args.window[0], args.window[1])
    rows = []
    for method in _methods(args):
        curve = run_error_curve(cfg, method)
        gradient = slope_fit(curve, window)
        print(f"{method:8s} slope {gradient:+.3f} over t in [{window[0]}, {window[1]}]")
        label = _steps_label(cfg, method)
        rows.extend(
            ResultRow(method, p.t, label, p.estimate, p.exact, p.abs_error)
            for p in curve.points
        )
    path = _out_path(args, doc)
    if path:
        write_csv(ResultTable.from_rows(rows, base_metadata(cfg)), path)
        print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def _cmd_cost(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    cfg = doc.experiment
    steps = args.steps
    if steps < 1:
        raise ConfigError("--steps must be at least 1", "steps")
    grid = args.grid
    if grid is None:
        basis = cfg.profiling.basis
        grid = 2 * len(basis.orders) + 1 if basis is not None else 5
    ep = circuit_cost(
        "ep",
        formula=cfg.formula,
        partition=cfg.partition,
        trotter_steps=steps,
        grid_points=grid,
    )
    mpf_counts = tuple(range(1, steps + 1))
    mpf = circuit_cost(
        "mpf", formula=cfg.formula, partition=cfg.partition, step_counts=mpf_counts
    )
    lines = [
        f"profiling: {ep.circuits} circuits x depth {ep.depth_steps} steps"
        f" = {ep.total_steps} steps, {ep.elementary_gates} gates (grid {grid})",
        f"multi-product (counts 1..{steps}): {mpf.circuits} circuits,"
        f" {mpf.total_steps} steps, {mpf.elementary_gates} gates",
    ]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    path = _out_path(args, doc)
    if path:
        atomic_write_text(text, path)
        print(f"wrote cost report to {path}")
    return EXIT_OK


_HANDLERS = {
    "run": _cmd_run,
    "profile": _cmd_profile,
    "mpf": _cmd_mpf,
    "calibrate": _cmd_calibrate,
    "slope": _cmd_slope,
    "cost": _cmd_cost,
}


def run_command(argv: Sequence[str]) -> int:
    """Execute one CLI invocation; diagnostics go to stderr, never the data file."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
        return _HANDLERS[args.command](args)
    except SystemExit as exc:  # --version and friends
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TrotterProfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
