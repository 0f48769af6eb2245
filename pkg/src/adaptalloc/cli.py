"""Command line entry point.

``run`` simulates one scenario and writes ``run.csv``, ``metrics.csv`` and
figures; ``sweep`` runs one scenario per epsilon and writes ``metrics.csv``
and an error-vs-epsilon figure. Exit status is 0 on success, 2 when any run
diverged and 1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .scenario import (
    ConfigError,
    ScenarioConfig,
    SweepRow,
    eps_sweep,
    export_csv,
    export_metrics,
    run_scenario,
)

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML scenario configuration")
    p.add_argument("--duration", type=float, help="simulated time in seconds")
    p.add_argument("--dt", type=float, help="integration step in seconds")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, help="random seed for injected disturbances")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver events")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adaptalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="simulate one scenario")
    _common(run)
    run.add_argument("--eps", type=float, help="time-scale separation epsilon")
    sweep = sub.add_parser("sweep", help="sweep epsilon with a 1 m vertical offset")
    _common(sweep)
    sweep.add_argument(
        "--eps",
        type=float,
        nargs="+",
        default=[1.0, 0.5, 0.33, 0.25, 0.2],
        help="descending list of epsilon values",
    )
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    return parser


def _load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    overrides = {}
    for key in ("duration", "dt", "seed"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if args.command == "run" and args.eps is not None:
        overrides["epsilon"] = args.eps
    try:
        return replace(cfg, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_run(cfg: ScenarioConfig, args) -> int:
    runlog, metrics = run_scenario(cfg)
    export_csv(runlog, args.out / "run.csv")
    export_metrics([SweepRow(cfg.epsilon, metrics)], args.out / "metrics.csv")
    if not args.no_plots and len(runlog):
        from .report import run_figures
        from .scenario import build_scenario

        model = build_scenario(cfg).model
        run_figures(runlog.table(), model.input_names, model.param_names, args.out)
    status = "diverged" if metrics.diverged else "ok"
    print(
        f"epsilon={cfg.epsilon:g} {status} max_tracking_error={metrics.max_tracking_error:.4g} m "
        f"final_W_err={metrics.final_W_err_norm:.4g} steady_e_s={metrics.steady_es_norm:.4g}"
    )
    if metrics.reason:
        print(f"  reason: {metrics.reason}")
    return EXIT_DIVERGED if metrics.diverged else EXIT_OK


def _cmd_sweep(cfg: ScenarioConfig, args) -> int:
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    rows = eps_sweep(cfg, args.eps, workers=args.workers)
    export_metrics(rows, args.out / "metrics.csv")
    if not args.no_plots:
        from .report import sweep_figure

        sweep_figure([r.epsilon for r in rows], [r.metrics.max_tracking_error for r in rows], args.out)
    for r in rows:
        status = "diverged" if r.metrics.diverged else "ok"
        print(f"epsilon={r.epsilon:g} {status} max_tracking_error={r.metrics.max_tracking_error:.4g} m")
    return EXIT_DIVERGED if any(r.metrics.diverged for r in rows) else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        cfg = _load_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            return _cmd_run(cfg, args)
        return _cmd_sweep(cfg, args)
    except ConfigError as exc:
        print(f"adaptalloc: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"adaptalloc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
