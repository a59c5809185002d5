"""Command line: pick a backend and serve stdin/stdout."""

from __future__ import annotations

import argparse
import logging
import sys

from .mirror import MirrorBackend, StubBackend
from .server import serve

BACKENDS = {"mirror": MirrorBackend, "stub": StubBackend}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refeval",
        description="Reference evaluator for the compression-search line protocol.",
    )
    parser.add_argument(
        "--backend",
        choices=sorted(BACKENDS),
        default="mirror",
        help="mirror reproduces the engine's simulated metrics; "
        "stub only echoes the base model (default: mirror)",
    )
    parser.add_argument("--seed", type=int, default=0, help="evaluation seed (default: 0)")
    parser.add_argument(
        "--respond-delay",
        type=float,
        default=0.0,
        metavar="SECONDS",
        help="wait before every response; lets clients exercise their timeouts",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    backend = BACKENDS[args.backend](args.seed)
    return serve(backend, respond_delay=args.respond_delay)


if __name__ == "__main__":
    sys.exit(main())
