"""Command-line interface for the two-scale thermo-elastic growth model."""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from thermo_homogenization import __version__
from thermo_homogenization.commands.registry import get_registry
from thermo_homogenization.config import Config
from thermo_homogenization.errors import HomogenizationError, NumericalError, ValidationError
from thermo_homogenization.logger import get_logger, setup_logger
from thermo_homogenization.outputs import jsonable

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_INTERRUPTED = 130


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser with one nested subparser per command."""
    registry = get_registry()

    parser = argparse.ArgumentParser(
        prog="thermo-homog",
        description="Cell problems, coefficient tables, homogenized and eps-resolved runs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Examples:
  %(prog)s cell solve --h 0.01                 # Effective coefficients at one height
  %(prog)s --out results table build           # Tabulate over the height band
  %(prog)s table query --table results/table.json --h 0
  %(prog)s --out results macro run --table results/table.json
  %(prog)s --profile=benchmark --out results micro run --level 2
  %(prog)s compare --macro results/macro --micro results/micro_L2
  %(prog)s --list-profiles                     # List available profiles

Available Commands:
  {', '.join(registry.list_commands())}

Configuration:
  Create ./thermo_homog.yaml (or pass --config FILE, YAML or JSON) to override defaults:

  params:
    theta0: 0.2
  macro:
    dt: 5.0e-4

  Environment variables THERMO_HOMOG_<DOTTED_KEY> override the file,
  command-line flags override both.

Exit Codes:
  0: Success
  1: Unexpected error
  2: Invalid arguments or configuration
  3: Numerical failure (error JSON on stderr)
  130: Interrupted
        """,
    )

    parser.add_argument(
        '-V', '--version',
        action='version',
        version=f'%(prog)s {__version__}',
    )

    parser.add_argument(
        '--config',
        type=Path,
        help='Path to a YAML or JSON configuration file',
    )

    parser.add_argument(
        '--profile',
        metavar='NAME',
        help='Use a predefined profile (benchmark, quick, superellipse)',
    )

    parser.add_argument(
        '--list-profiles',
        action='store_true',
        help='List available profiles with descriptions',
    )

    parser.add_argument(
        '--out',
        type=Path,
        metavar='DIR',
        help='Output directory (default: outputs.dir)',
    )

    parser.add_argument(
        '--seed',
        type=int,
        help='Seed for sampled checks (default: seed)',
    )

    parser.add_argument(
        '--threads',
        type=int,
        help='Worker threads for per-height and per-cell work (default: threads)',
    )

    parser.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        type=str.upper,
        help='Console log level (default: INFO)',
    )

    parser.add_argument(
        '--verbose',
        action='store_true',
        help='Enable verbose output (same as --log-level DEBUG)',
    )

    parser.add_argument(
        '--quiet',
        action='store_true',
        help='Suppress console output (still logs to file)',
    )

    parser.add_argument(
        '--log-file',
        type=Path,
        help='Path to log file (default: /tmp/thermo_homogenization_TIMESTAMP.log)',
    )

    parser.set_defaults(command=None)
    registry.add_subparsers(parser)
    return parser


def list_profiles(config: Config) -> None:
    """Display available profiles with descriptions."""
    profiles = config.list_profiles()

    print("\nAvailable Profiles:")
    print("=" * 70)

    if not profiles:
        print("  No profiles defined")
    else:
        active = config.active_profile
        for name, description in profiles.items():
            marker = " *" if name == active else ""
            print(f"  {name:15} - {description}{marker}")

    print()
    print("Usage: thermo-homog --profile=benchmark micro run")
    print()


def report_error(error: HomogenizationError) -> None:
    """Machine-readable error record on stderr."""
    sys.stderr.write(json.dumps(jsonable(error.to_dict()), sort_keys=True) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)

    setup_logger(
        log_file=args.log_file,
        verbose=args.verbose,
        quiet=args.quiet,
        level=args.log_level,
    )
    logger = get_logger()

    try:
        config = Config(
            config_path=args.config,
            profile=args.profile,
            overrides={'threads': args.threads, 'seed': args.seed, 'outputs.dir': args.out},
        )

        if args.list_profiles:
            list_profiles(config)
            return EXIT_OK

        if args.command is None:
            parser.print_usage(sys.stderr)
            logger.error("No command given")
            return EXIT_VALIDATION

        if config.active_profile:
            logger.info(f"Using profile: {config.active_profile}")

        command = get_registry().create_command(args.command, config, args)
        if command is None:
            logger.error(f"Unknown command: {args.command}")
            return EXIT_VALIDATION

        success = command.run()
        logger.show_summary()
        return EXIT_OK if success else EXIT_FAILURE

    except ValidationError as e:
        logger.error(e.message)
        report_error(e)
        return EXIT_VALIDATION
    except NumericalError as e:
        logger.error(e.message)
        report_error(e)
        logger.show_summary()
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        logger.warning("\nInterrupted by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
