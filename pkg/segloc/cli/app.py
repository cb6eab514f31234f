"""
SegLoc Project - Command-Line Application
Entry point for the ``segloc`` command.
"""

import argparse
import logging
import sys
from typing import List, Optional

from .. import __description__, __version__
from ..config.settings import LOG_LEVEL
from .routes import UsageError, create_cli_routes

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """
    Create the argument parser with every subcommand registered.

    Returns:
        argparse.ArgumentParser instance
    """
    parser = argparse.ArgumentParser(prog="segloc", description=__description__)
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    create_cli_routes(subparsers)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and return its exit code.

    0 on success, 1 on runtime failures, 2 on usage errors.
    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 for --help / --version
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    logging.basicConfig(
        level=getattr(args, "log_level", LOG_LEVEL),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.handler(args)
    except UsageError as e:
        print(f"segloc {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logger.error(
            f"{args.command} failed: {e}",
            exc_info=logger.isEnabledFor(logging.DEBUG),
        )
        print(f"segloc {args.command}: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
