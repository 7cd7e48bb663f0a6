# Ratunif Services - Command Line
# v1.0.0: ratunif FILE [--mode auto|fo|ho] [--abstraction free|scope] [--trace] [--check-depth K|off] [--json] [--max-steps N]

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from .config import EXIT_INTERNAL_ERROR, EXIT_NO_UNIFIER, EXIT_UNIFIER, VERSION, logger, set_log_level
from .errors import InputError, RatunifError
from .flatten_service import ABSTRACTIONS
from .pipeline_service import MODES, RunConfig, solve
from .render_service import render_json, render_text
from .settings_service import load_settings


def _check_depth(value: str) -> int:
    if value.lower() == "off":
        return 0
    try:
        depth = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'off', got {value!r}")
    if depth < 0:
        raise argparse.ArgumentTypeError("check depth must be non-negative")
    return depth


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratunif",
        description="Unify rational higher-order pattern terms by saturation.",
    )
    parser.add_argument("input", help="problem file, or - for standard input")
    parser.add_argument("--mode", choices=MODES, default="auto")
    parser.add_argument("--trace", action="store_true", help="print the numbered saturation steps")
    parser.add_argument("--check-depth", type=_check_depth, default=None, metavar="K|off",
                        help="verify the unifier up to expansion depth K")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--max-steps", type=int, default=None, metavar="N")
    parser.add_argument("--schedule", choices=("fifo", "lifo"), default=None)
    parser.add_argument("--abstraction", choices=ABSTRACTIONS, default=None,
                        help="close generated rec-consts over free variables or over the whole scope")
    parser.add_argument("--check-measure", action="store_true", default=None,
                        help="log a warning whenever the termination measure fails to decrease")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"ratunif {VERSION}")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_settings(
        load_settings(),
        path=args.input,
        mode=args.mode,
        trace=args.trace,
        output="json" if args.json else "text",
        max_steps=args.max_steps,
        schedule=args.schedule,
        check_measure=args.check_measure,
        abstraction=args.abstraction,
    )
    if args.check_depth is not None:
        cfg.check_depth = args.check_depth or None
    return cfg


def _read_input(path: Optional[str]) -> str:
    try:
        if path is None or path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot read {path}: {e}")


def run(config: RunConfig, text: Optional[str] = None) -> Tuple[int, str]:
    """Exit status and rendered output; diagnostics go to the log."""
    try:
        source = text if text is not None else _read_input(config.path)
        outcome = solve(source, config)
    except RatunifError as e:
        logger.error(str(e))
        return e.exit_code, ""
    except RecursionError:
        logger.error("Recursion limit reached")
        return EXIT_INTERNAL_ERROR, ""
    if config.output == "json":
        body = json.dumps(render_json(outcome, config.trace), indent=2, ensure_ascii=False) + "\n"
    else:
        body = render_text(outcome, config.trace)
    return (EXIT_UNIFIER if outcome.found else EXIT_NO_UNIFIER), body


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_log_level("DEBUG" if args.verbose > 1 else "INFO")
    code, body = run(config_from_args(args))
    sys.stdout.write(body)
    return code
