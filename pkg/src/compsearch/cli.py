"""Command-line entry points.

    compsearch search  [--config FILE] [field overrides...]
    compsearch oracle  [--config FILE] [field overrides...]
    compsearch report  RUN_DIR... --out DIR [--oracle DIR]
    compsearch catalog dump [--catalog-filter FILE] [-o PATH]
    compsearch kg export    [--catalog-filter FILE] [-o PATH]

Every run-configuration field is also a flag (underscores become
dashes), applied on top of the config file. Logs go to stderr; artifacts
go to the output directory or stdout.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import sys

from .catalog import ConfigurationError, build_catalog
from .config import RunConfig, load_config
from .knowledge_graph import build_kg, export_tsv
from .reporting import cmd_oracle, cmd_report, cmd_search

logger = logging.getLogger(__name__)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="TOML or JSON config file")
    for field in dataclasses.fields(RunConfig):
        flag = "--" + field.name.replace("_", "-")
        if field.type == "bool":
            parser.add_argument(flag, action="store_true", default=None, dest=field.name)
        elif field.type in ("int", "int | None"):
            parser.add_argument(flag, type=int, default=None, dest=field.name)
        elif field.type == "float":
            parser.add_argument(flag, type=float, default=None, dest=field.name)
        else:
            parser.add_argument(flag, type=str, default=None, dest=field.name)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        field.name: getattr(args, field.name)
        for field in dataclasses.fields(RunConfig)
        if getattr(args, field.name) is not None
    }
    return load_config(args.config, overrides)


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _add_verbose(parser: argparse.ArgumentParser, dest: str = "verbose") -> None:
    # subcommands parse into a fresh namespace that is copied back over the
    # parent's, so a shared dest would reset the parent's count to the default
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, dest=dest,
        help="-v for info, -vv for debug",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compsearch",
        description="Progressive multi-objective search over model-compression schemes.",
    )
    _add_verbose(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="run the progressive search")
    _add_config_flags(p_search)
    _add_verbose(p_search, "verbose_sub")

    p_oracle = sub.add_parser("oracle", help="exhaustively evaluate a small scheme space")
    _add_config_flags(p_oracle)
    _add_verbose(p_oracle, "verbose_sub")

    p_report = sub.add_parser("report", help="summarize finished runs")
    p_report.add_argument("run_dirs", nargs="+", metavar="RUN_DIR")
    p_report.add_argument("--out", required=True, help="directory for report.csv / curves.csv")
    p_report.add_argument("--oracle", default=None, help="directory holding oracle_hv.json")
    _add_verbose(p_report, "verbose_sub")

    p_catalog = sub.add_parser("catalog", help="catalog inspection")
    catalog_sub = p_catalog.add_subparsers(dest="catalog_command", required=True)
    p_dump = catalog_sub.add_parser("dump", help="write the strategy catalog as JSON lines")
    p_dump.add_argument("--catalog-filter", default=None, help="whitelist JSON file")
    p_dump.add_argument("-o", "--out", default=None, help="output path (default stdout)")
    _add_verbose(p_dump, "verbose_sub")

    p_kg = sub.add_parser("kg", help="knowledge-graph inspection")
    kg_sub = p_kg.add_subparsers(dest="kg_command", required=True)
    p_export = kg_sub.add_parser("export", help="write the graph as TSV triples")
    p_export.add_argument("--catalog-filter", default=None, help="whitelist JSON file")
    p_export.add_argument("-o", "--out", default=None, help="output path (default stdout)")
    _add_verbose(p_export, "verbose_sub")

    return parser


def _run_catalog_dump(args: argparse.Namespace) -> int:
    catalog = build_catalog(args.catalog_filter)
    with _open_out(args.out) as fh:
        for strategy in catalog.strategies:
            fh.write(
                json.dumps(
                    {
                        "id": strategy.canonical_id,
                        "method": strategy.method,
                        "assignment": dict(strategy.assignment),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    logger.info("dumped %d strategies", len(catalog))
    return 0


def _run_kg_export(args: argparse.Namespace) -> int:
    catalog = build_catalog(args.catalog_filter)
    kg = build_kg(catalog)
    with _open_out(args.out) as fh:
        count = export_tsv(kg, fh)
    logger.info("exported %d triples", count)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    verbosity = args.verbose + getattr(args, "verbose_sub", 0)
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        if args.command == "search":
            cmd_search(_config_from_args(args))
            return 0
        if args.command == "oracle":
            cmd_oracle(_config_from_args(args))
            return 0
        if args.command == "report":
            cmd_report(args.run_dirs, args.out, args.oracle)
            return 0
        if args.command == "catalog":
            return _run_catalog_dump(args)
        if args.command == "kg":
            return _run_kg_export(args)
        raise AssertionError(f"unhandled command: {args.command}")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream consumer (head, less) closed the pipe; not an error
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
