"""Command-line entry point: ``bitextmine <stage> [--config FILE] [--set section.key=value ...]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .crawler import CrawlError
from .model import FormatError

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def run_stage(stage: str, config_path: str | None = None, overrides: list[str] | tuple = ()) -> int:
    """Run one stage (or the whole pipeline) and map failures to exit codes."""
    try:
        config = pipeline.Config.load(config_path, overrides)
        if stage == "pipeline":
            pipeline.run_pipeline(config)
        elif stage in pipeline.STAGE_FUNCS:
            pipeline.STAGE_FUNCS[stage](config)
        else:
            raise ValueError(f"unknown stage {stage!r}")
    except pipeline.MissingInput as exc:
        print(f"error: missing input file: {exc.path}", file=sys.stderr)
        return EXIT_INVALID
    except (FormatError, ValueError, KeyError, CrawlError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitextmine", description="Mine English-Japanese parallel sentences from web crawls.")
    parser.add_argument("stage", choices=(*pipeline.STAGES, "pipeline"))
    parser.add_argument("-c", "--config", help=f"config file (default: ${pipeline.CONFIG_ENV})")
    parser.add_argument("-s", "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    return run_stage(args.stage, args.config, args.overrides)


if __name__ == "__main__":
    sys.exit(main())
