#!/usr/bin/env python3
# cli.py
"""
Damped Wave Lab - command line
Subcommands: solve, sweep, classify, audit-testfn, transform-check, converge

Exit codes: 0 all claim checks passed, 1 a claim check failed,
2 configuration error, 3 any other runtime error
"""

import argparse
import json
import sys
from contextlib import redirect_stdout
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from ..core.errors import ConfigurationError, DampedWaveError, ParameterRangeError
from ..core.exponents import exponent_report
from ..core.model import DampingSpec
from .config import SWEEP_KINDS, ExperimentConfig, ExperimentKind, environment_defaults, load_config
from .console import print_error, print_report_summary, print_warning
from .experiments import ExperimentResult, run
from .reporting import json_safe, render_report, render_table

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIGURATION = 2
EXIT_RUNTIME = 3

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


def configure_logging(level: str):
    logger.remove()
    logger.add(sys.stderr, level=level.upper())


def _common_options(parser: argparse.ArgumentParser, defaults: dict):
    parser.add_argument("--out", default=None, help="Directory for report JSON, CSV tables and snapshots")
    parser.add_argument("--jobs", type=int, default=defaults["jobs"],
                        help=f"Worker processes for sweeps (default: {defaults['jobs']})")
    parser.add_argument("--format", choices=("csv", "json"), default="json", dest="output_format",
                        help="Rendering of the result on stdout")
    parser.add_argument("--log-level", default=defaults["log_level"], type=str.upper, choices=LOG_LEVELS,
                        help=f"loguru level for stderr (default: {defaults['log_level']})")
    parser.add_argument("--snapshots", action="store_true", help="Write binary snapshots of sampled states")
    parser.add_argument("--quiet", action="store_true", help="Skip the console summary")


def build_parser(defaults: Optional[dict] = None) -> argparse.ArgumentParser:
    defaults = defaults or {"jobs": 1, "log_level": "WARNING"}
    parser = argparse.ArgumentParser(
        prog="damped-wave-lab",
        description="Numerical lab for u_tt - Δu + b(t)u_t = N(u) with radial data",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Single run of a configuration")
    solve.add_argument("config", help="INI experiment configuration")
    _common_options(solve, defaults)

    sweep = commands.add_parser("sweep", help="eps / lambda / delta sweep named in the configuration")
    sweep.add_argument("config")
    _common_options(sweep, defaults)

    classify = commands.add_parser("classify", help="Critical exponents and regime of a damping")
    classify.add_argument("--d", type=int, required=True, help="Space dimension")
    classify.add_argument("--p", type=float, default=None, help="Nonlinearity exponent")
    classify.add_argument("--damping", required=True, help="e.g. 'power:mu=1,beta=-2' or 'exponential:mu=1,a=1'")
    classify.add_argument("--log-level", default=defaults["log_level"], type=str.upper, choices=LOG_LEVELS)

    audit = commands.add_parser("audit-testfn", help="Weak-form identity and test-function estimates")
    audit.add_argument("config")
    audit.add_argument("--tau", type=float, action="append", default=None,
                       help="Test-function scale; repeat for several (default: taus from the configuration)")
    audit.add_argument("--check-lambda0", action="store_true",
                       help="Also run lambda = 10 lambda0 and check the lifespan bound")
    _common_options(audit, defaults)

    transform = commands.add_parser("transform-check", help="Damped versus transformed solver")
    transform.add_argument("config")
    _common_options(transform, defaults)

    converge = commands.add_parser("converge", help="Observed orders under grid refinement")
    converge.add_argument("config")
    converge.add_argument("--levels", type=int, default=None, help="Number of refinement levels (>= 3)")
    _common_options(converge, defaults)
    return parser


def _config_for(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    if args.command == "solve":
        return config.updated("experiment", kind=ExperimentKind.SINGLE.value)
    if args.command == "sweep":
        if config.experiment.kind not in SWEEP_KINDS:
            raise ConfigurationError(
                f"sweep needs experiment.kind in {[k.value for k in SWEEP_KINDS]}, got {config.experiment.kind.value}")
        return config
    if args.command == "audit-testfn":
        changes = {"kind": ExperimentKind.TESTFN_AUDIT.value}
        if args.tau:
            changes["taus"] = list(args.tau)
        if args.check_lambda0:
            changes["check_lambda0"] = True
        return config.updated("experiment", **changes)
    if args.command == "transform-check":
        return config.updated("experiment", kind=ExperimentKind.TRANSFORM_CHECK.value)
    changes = {"kind": ExperimentKind.CONVERGENCE.value}
    if args.levels is not None:
        changes["levels"] = args.levels
    return config.updated("experiment", **changes)


def _emit(result: ExperimentResult, output_format: str):
    if output_format == "csv" and result.main_table is not None:
        sys.stdout.write(render_table(result.main_table))
    else:
        sys.stdout.write(render_report(result.report) + "\n")


def _classify(args: argparse.Namespace) -> int:
    try:
        damping = DampingSpec.parse(args.damping)
    except (ParameterRangeError, ValidationError) as exc:
        raise ConfigurationError(f"invalid --damping '{args.damping}': {exc}") from exc
    report = exponent_report(args.d, damping, p=args.p)
    sys.stdout.write(json.dumps(json_safe(report.to_dict()), sort_keys=True, indent=2) + "\n")
    return EXIT_PASS


def _experiment(args: argparse.Namespace) -> int:
    config = _config_for(args)
    result = run(config, out_dir=args.out, jobs=max(1, args.jobs), snapshots=args.snapshots)
    if not args.quiet:
        # banners go to stderr so stdout stays machine-readable
        with redirect_stdout(sys.stderr):
            print_report_summary(result.report)
    _emit(result, args.output_format)
    return EXIT_PASS if result.passed else EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    try:
        defaults = environment_defaults()
    except ConfigurationError as exc:
        print_error(str(exc))
        return EXIT_CONFIGURATION
    args = build_parser(defaults).parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.command == "classify":
            return _classify(args)
        return _experiment(args)
    except (ConfigurationError, ValidationError) as exc:
        logger.error(f"configuration error: {exc}")
        print_error(f"Configuration error: {exc}")
        return EXIT_CONFIGURATION
    except (DampedWaveError, OSError) as exc:
        logger.error(f"runtime error: {exc}")
        print_error(f"Runtime error: {exc}")
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print_warning("Run terminated by user.")
        return EXIT_RUNTIME
    except Exception as exc:
        logger.exception(f"unexpected failure: {exc}")
        print_error(f"Runtime error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
