# mm/ui/cli.py
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

from .. import __version__
from ..core.app_core import AppCore
from ..core.constants import EXIT_FAILURE, EXIT_USAGE_ERROR
from ..core.errors import ModMetricsError, UsageError
from ..core.logging_setup import default_log_file, setup_logging
from ..core.project_config import (
    COMBINE_MODES, CRITERIA, ENGINES, EXECUTORS, FORMATS, THRESHOLD_MODES,
    effective_workers, load_project_config, merge_overrides,
)
from ..handlers.analysis_action_handler import AnalysisActionHandler
from ..handlers.bench_action_handler import BenchActionHandler, bench_sizes
from ..handlers.facts_action_handler import FactsActionHandler, apply_preset


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors raised as UsageError (exit 64) instead of exiting 2."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = _non_negative_int(text)
    if value == 0:
        raise argparse.ArgumentTypeError("expected a positive integer, got 0")
    return value


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {value}")
    return value


def _probability(text: str) -> float:
    value = _non_negative_float(text)
    if value > 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {value}")
    return value


def _criteria_list(text: str) -> List[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [name for name in names if name not in CRITERIA]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"criteria must be a comma-separated subset of {','.join(CRITERIA)}")
    return names


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="Config file (default: ./.modmetrics.json if present)")
    parser.add_argument("--out", type=Path, help="Output file (default: stdout)")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    parser.add_argument("--log-file", type=Path, help="Also log to this file (rotated)")


def _add_engine(parser: argparse.ArgumentParser, bench: bool = False) -> None:
    if not bench:
        parser.add_argument("--engine", choices=ENGINES)
        parser.add_argument("--workers", type=_non_negative_int, help="Worker count (0 = detected cores)")
    else:
        parser.add_argument("--workers", type=_positive_int, nargs="+",
                            help="Parallel worker counts to time (default: detected cores)")
    parser.add_argument("--executor", choices=EXECUTORS)
    parser.add_argument("--checked", action="store_true", default=None,
                        help="Assert every compaction write lands in a reserved slot range")


def _add_generator(parser: argparse.ArgumentParser, bench: bool = False) -> None:
    parser.add_argument("--seed", type=_non_negative_int)
    sizes = dict(nargs="+") if bench else {}
    parser.add_argument("--classes", type=_positive_int, **sizes)
    parser.add_argument("--methods", type=_positive_int, **sizes)
    parser.add_argument("--attributes", type=_positive_int, **sizes)
    parser.add_argument("--kmax-calls", type=_non_negative_int)
    parser.add_argument("--kmax-accesses", type=_non_negative_int)
    parser.add_argument("--intra-bias", type=_probability)
    parser.add_argument("--allow-empty-classes", action="store_true", default=None)
    parser.add_argument("--preset", help="Use the size of a reference system" + (" ('all' for every one)" if bench else ""))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modmetrics", description="Modularity metrics and move-method suggestions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    analyze = commands.add_parser("analyze", help="Compute fan-in/out, similarity, LCOM and CBO")
    analyze.add_argument("--facts", type=Path, required=True)
    _add_common(analyze)
    _add_engine(analyze)

    suggest = commands.add_parser("suggest", help="Suggest move-method refactorings")
    suggest.add_argument("--facts", type=Path, required=True)
    _add_common(suggest)
    _add_engine(suggest)
    suggest.add_argument("--criteria", type=_criteria_list, help="Comma-separated: similarity,cohesion,coupling")
    suggest.add_argument("--combine", choices=COMBINE_MODES)
    suggest.add_argument("--threshold-mode", choices=THRESHOLD_MODES)
    suggest.add_argument("--threshold-similarity", type=_non_negative_float)
    suggest.add_argument("--threshold-lcom", type=_non_negative_float)
    suggest.add_argument("--threshold-cbo", type=_non_negative_float)
    suggest.add_argument("--max-moves-per-class", type=_non_negative_int, help="0 = unlimited")
    suggest.add_argument("--verbose-candidates", action="store_true", default=None,
                         help="List the other passing destinations per suggestion")

    bench = commands.add_parser("bench", help="Time sequential vs parallel analysis on generated systems")
    _add_common(bench)
    _add_engine(bench, bench=True)
    _add_generator(bench, bench=True)
    bench.add_argument("--repeats", type=_positive_int, help="Runs per measurement; the fastest counts")
    bench.add_argument("--csv", type=Path,
                       help="CSV path (default: <out>.csv, <stem>.bench.csv for a .csv report, or ./bench.csv)")
    bench.add_argument("--plot", type=Path, help="PNG figure path (needs matplotlib)")

    gen = commands.add_parser("generate", help="Write a synthetic facts file")
    _add_common(gen)
    _add_generator(gen)

    validate = commands.add_parser("validate", help="Check a facts file against the model invariants")
    validate.add_argument("--facts", type=Path, required=True)
    _add_common(validate)
    return parser


def _config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Maps parsed flags onto config keys; absent flags map to None."""
    overrides = {
        "format": getattr(args, "format", None),
        "engine": getattr(args, "engine", None),
        "executor": getattr(args, "executor", None),
        "checked_compaction": getattr(args, "checked", None),
        "criteria": getattr(args, "criteria", None),
        "combine": getattr(args, "combine", None),
        "threshold_mode": getattr(args, "threshold_mode", None),
        "max_moves_per_class": getattr(args, "max_moves_per_class", None),
        "verbose_candidates": getattr(args, "verbose_candidates", None),
        "seed": getattr(args, "seed", None),
        "kmax_calls": getattr(args, "kmax_calls", None),
        "kmax_accesses": getattr(args, "kmax_accesses", None),
        "intra_bias": getattr(args, "intra_bias", None),
        "allow_empty_classes": getattr(args, "allow_empty_classes", None),
        "bench_repeats": getattr(args, "repeats", None),
    }
    if args.command != "bench":
        overrides["workers"] = getattr(args, "workers", None)
        for key in ("classes", "methods", "attributes"):
            overrides[key] = getattr(args, key, None)
    return overrides


def _threshold_overrides(args: argparse.Namespace) -> Dict[str, Optional[float]]:
    return {name: getattr(args, f"threshold_{name}", None) for name in ("similarity", "lcom", "cbo")}


def _dispatch(args: argparse.Namespace, core: AppCore) -> int:
    fmt = core.config["format"]
    if args.command == "analyze":
        return AnalysisActionHandler(core).handle_analyze(args.facts, args.out, fmt)
    if args.command == "suggest":
        return AnalysisActionHandler(core).handle_suggest(args.facts, args.out, fmt)
    if args.command == "generate":
        return FactsActionHandler(core).handle_generate(args.out)
    if args.command == "validate":
        return FactsActionHandler(core).handle_validate(args.facts, args.out, fmt)
    if args.command == "bench":
        methods = args.methods or core.config["bench_methods"]
        sizes = bench_sizes(methods, args.classes, args.attributes, args.preset)
        workers = args.workers or [effective_workers(core.config)]
        return BenchActionHandler(core).handle_bench(
            sizes, workers, core.config["bench_repeats"], args.out, args.csv, args.plot, fmt)
    raise UsageError(f"Unknown command '{args.command}'")


def launch_app(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging("INFO")
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE_ERROR
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)

    if args.verbose or args.log_file:
        setup_logging("DEBUG" if args.verbose else "INFO", args.log_file)
    try:
        config = merge_overrides(load_project_config(args.config), _config_overrides(args))
        if args.command == "generate":
            config = apply_preset(config, args.preset)
        if not args.verbose:
            log_file = args.log_file or (default_log_file() if config["log_to_file"] else None)
            setup_logging(config["log_level"], log_file)
        core = AppCore(config, threshold_overrides=_threshold_overrides(args))
        logger.debug(f"CLI: {args.command} with engine {core.engine_label}")
        return _dispatch(args, core)
    except ModMetricsError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"CLI: Unexpected failure in '{args.command}': {e}")
        return EXIT_FAILURE
