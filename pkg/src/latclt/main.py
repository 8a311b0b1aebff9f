"""Main entry point for latclt."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, TextIO

from latclt.config import LOG_LEVELS, load_config
from latclt.experiments import (
    EXPERIMENT_KINDS,
    ConfigError,
    ExperimentConfig,
    RunOptions,
    apply_overrides,
    config_from_mapping,
    run_count,
    run_experiment,
    run_sample_lattice,
    run_volume,
)
from latclt.report import OutputError, emit_outputs, to_json_ready

ONE_OFF_COMMANDS = ("count", "volume", "sample-lattice")

_DESCRIPTIONS = {
    "dioph-clt": "Distribution of weighted Diophantine approximant counts.",
    "fuchs1d": "One-dimensional approximant counts with the log T log log T scaling.",
    "lattice-clt": "Distribution of lattice point counts in product domains.",
    "spiral-clt": "Distribution of counts with angular constraints.",
    "mixing-probe": "Correlation decay of a capped Siegel transform along the flow.",
    "tail-probe": "Tail exponent of the Siegel transform along the dyadic flow.",
    "variance-probe": "Correlation series of the level counts against their variance.",
    "count": "Count the points of one lattice in a domain (JSON to stdout).",
    "volume": "Volume of a product domain (JSON to stdout).",
    "sample-lattice": "Draw lattices from a sampler (JSON to stdout).",
}


def setup_logging(log_level: str, stream: TextIO | None = None) -> None:
    """Set up logging configuration.

    Args:
        log_level: The logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        stream: Log destination; defaults to stdout.
    """
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.StreamHandler(stream or sys.stdout),
        ],
    )


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments.

    Returns:
        Parsed arguments namespace.
    """
    parser = argparse.ArgumentParser(
        prog="latclt",
        description="Monte Carlo experiments for central limit theorems of lattice counts",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in EXPERIMENT_KINDS:
        sub = subparsers.add_parser(command, help=_DESCRIPTIONS[command])
        sub.add_argument(
            "--config",
            type=str,
            required=True,
            help="Path to the JSON experiment configuration.",
        )
        sub.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override a configuration value; repeatable. Dotted keys reach nested objects.",
        )
        sub.add_argument(
            "--out",
            type=str,
            default=None,
            help="Output directory. Defaults to LATCLT_OUTPUT_DIR/<subcommand>.",
        )
        sub.add_argument(
            "--workers",
            type=int,
            default=None,
            help="Worker processes. Overrides config.",
        )
        sub.add_argument(
            "--log-level",
            type=str,
            default=None,
            choices=list(LOG_LEVELS),
            help="Logging level. Overrides config.",
        )
    return parser.parse_args(argv)


def read_experiment_config(path: Path, command: str, overrides: Sequence[str]) -> ExperimentConfig:
    """Load a configuration file for a subcommand and apply ``--set`` overrides.

    A missing ``kind`` defaults to the subcommand.

    Raises:
        ConfigError: If the file is unreadable, malformed, or its kind differs
            from the subcommand.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}", "--config", "readable") from e
    try:
        raw: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}", "", "JSON") from e
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object", "", "type")
    raw = apply_overrides(raw, overrides)
    raw.setdefault("kind", command)
    if raw["kind"] != command:
        raise ConfigError(
            f"configuration is for {raw['kind']!r}, not {command!r}", "kind", "matches subcommand"
        )
    return config_from_mapping(raw)


def run_command(config: ExperimentConfig, options: RunOptions, out: Path) -> list[Path] | None:
    """Run one subcommand.

    One-off commands print a JSON document and return None; experiments write
    their output files and return the paths.
    """
    if config.kind in ONE_OFF_COMMANDS:
        if config.kind == "count":
            result = run_count(config, options)
        elif config.kind == "volume":
            result = run_volume(config)
        else:
            result = run_sample_lattice(config)
        print(json.dumps(to_json_ready(result), indent=2, sort_keys=True))
        return None
    report, records = run_experiment(config, options)
    return emit_outputs(report, records, out)


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point.

    Returns:
        Exit code (0 for success, 1 for failure).
    """
    args = parse_args(argv)

    try:
        app_config = load_config()
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return 1

    # Setup logging
    log_level = args.log_level or app_config.log_level
    # One-off commands keep stdout for their JSON document.
    setup_logging(log_level, sys.stderr if args.command in ONE_OFF_COMMANDS else None)
    logger = logging.getLogger(__name__)

    output_dir = Path(args.out) if args.out else app_config.output_dir / args.command
    workers = args.workers if args.workers is not None else app_config.workers
    if workers < 1:
        logger.error(f"--workers must be at least 1, got {workers}")
        return 1
    options = RunOptions(
        workers=workers,
        progress=app_config.progress and sys.stderr.isatty(),
        max_points=app_config.max_points,
    )

    try:
        config = read_experiment_config(Path(args.config), args.command, args.set)
        paths = run_command(config, options, output_dir)
        if paths is not None:
            print(f"Outputs written to {output_dir}")
        return 0
    except (ConfigError, OutputError) as e:
        logger.error(str(e))
        return 1
    except Exception as e:
        logger.exception(f"Failed to run {args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
