import argparse
import sys
import tomllib
from typing import Optional, Sequence

from pydantic import ValidationError

from mqpsh.api import catalog, distxform, hessian, qpsh_check, run, supconv
from mqpsh.core.config import settings
from mqpsh.core.errors import AssertionFailed, MqpshError
from mqpsh.core.logger import configure_logging, logger


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with 1; 2 is reserved for failed assertions."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def create_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="mqpsh",
        description="q-plurisubharmonic functions on grids: Hessians, sup-convolution, checkers and scenarios.",
    )
    parser.add_argument("--log-level", help=f"override MQPSH_LOG_LEVEL (default: {settings.LOG_LEVEL})")
    parser.add_argument("--threads", type=int, help="worker cap, 0 = one per CPU (default: MQPSH_THREADS)")

    # -------------------------------------
    # Subcommands
    # -------------------------------------
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    run.register(subparsers)
    supconv.register(subparsers)
    hessian.register(subparsers)
    qpsh_check.register(subparsers)
    distxform.register(subparsers)
    catalog.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    if args.threads is not None:
        settings.THREADS = args.threads

    try:
        return args.handler(args)
    except AssertionFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(exc.witness.model_dump_json(indent=2), file=sys.stderr)
        return exc.exit_code
    except MqpshError as exc:
        logger.error("command_failed", command=args.command, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValidationError, tomllib.TOMLDecodeError) as exc:
        logger.error("command_failed", command=args.command, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
