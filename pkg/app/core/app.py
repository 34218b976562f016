"""
Command-line application factory
"""
import argparse
import logging
from pathlib import Path
from typing import List, Optional

import sentry_sdk
from pydantic import ValidationError

from app.core.config import get_settings
from app.core.logging_config import setup_logging
from app.domain.exceptions import PrecodingError
from app.services.experiment_service import ExperimentService, summarize
from app.services.preset_service import available_presets, resolve_config
from app.services.results_service import ResultsService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RECORD_FAILURES = 3


def init_monitoring() -> None:
    """Initialize Sentry when a DSN is configured"""
    settings = get_settings()
    if settings.SENTRY_DSN:
        sentry_sdk.init(
            dsn=settings.SENTRY_DSN,
            environment=settings.APP_ENV,
            release=f"{settings.APP_NAME}@{settings.APP_VERSION}",
            traces_sample_rate=1.0,
        )


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser with the run and summarize commands"""
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="hybrid-multicast",
        description=f"{settings.APP_NAME}: Monte Carlo evaluation of hybrid multicast precoders",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment and write its results")
    run.add_argument("--config", type=Path, help="JSON experiment file (overrides the preset)")
    run.add_argument("--preset", choices=available_presets(), help="Shipped experiment preset")
    run.add_argument("--trials", type=int, help="Number of channel realizations")
    run.add_argument("--seed", type=int, help="Base seed for the per-trial streams")
    run.add_argument("--workers", type=int, help="Worker processes (default: WORKERS setting)")
    run.add_argument("--out", type=Path, help=f"Output directory (default: {settings.RESULTS_DIR}/<name>)")

    summary = commands.add_parser("summarize", help="Summarize a records CSV")
    summary.add_argument("--in", dest="input", type=Path, required=True, help="Records CSV")
    summary.add_argument("--out", type=Path, required=True, help="Summary JSON")
    summary.add_argument("--grid-points", type=int, help="Points of the rate CDF grid")

    return parser


def _run(args: argparse.Namespace) -> int:
    settings = get_settings()
    if not args.config and not args.preset:
        logger.error("run needs --config or --preset")
        return EXIT_INVALID

    config = resolve_config(
        preset=args.preset,
        config_path=args.config,
        overrides={"trials": args.trials, "seed": args.seed},
    )
    out_dir = args.out or Path(settings.RESULTS_DIR) / config.name

    service = ExperimentService(settings=settings, workers=args.workers)
    records = service.run_experiment(config)
    summary = summarize(records, config.cdf_grid_points)
    ResultsService(out_dir).emit(records, summary, config)

    for row in summary.rows:
        logger.info(
            f"{row.method.value:>18} @ {row.snr_db:5.1f} dB: mean rate {row.mean_rate:.4f} bps/Hz, "
            f"{row.mean_solve_count:.1f} solves/trial, {row.failures} failed"
        )

    failures = sum(1 for r in records if r.failed)
    if failures:
        logger.error(f"{failures} of {len(records)} records failed, see the error column in {out_dir}")
        return EXIT_RECORD_FAILURES
    return EXIT_OK


def _summarize(args: argparse.Namespace) -> int:
    settings = get_settings()
    records = ResultsService.read_records(args.input)
    summary = summarize(records, args.grid_points or settings.CDF_GRID_POINTS)

    out_dir = args.out.parent
    results = ResultsService(out_dir)
    results.write_summary(summary, args.out)
    results.write_plot_data(summary)
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch a command.

    Returns:
        Process exit code: 0 success, 2 invalid configuration or fatal precoding
        error, 3 results written but some records failed
    """
    setup_logging()
    init_monitoring()
    args = create_parser().parse_args(argv)

    try:
        if args.command == "run":
            return _run(args)
        return _summarize(args)
    except ValidationError as e:
        logger.error(f"Invalid experiment configuration:\n{e}")
        return EXIT_INVALID
    except PrecodingError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return EXIT_INVALID
