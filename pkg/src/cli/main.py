"""Command-line entry point: synth, train, infer, eval, inspect and crossval."""

import argparse
import sys
import uuid
from collections.abc import Sequence
from pathlib import Path
from typing import Any, TextIO

from .. import __version__
from ..core.config import RUN_CONFIG_FILE, RunConfig
from ..core.error_utils import raise_not_found
from ..core.exceptions import EXIT_OK
from ..core.logging import clear_context, get_logger, set_run_id, setup_logging
from ..core.metrics import get_metrics_collector
from . import commands
from .error_handling import ErrorHandler

logger = get_logger(__name__)

_TRAIN_FLAGS = (
    "seed",
    "lambda1",
    "lambda2",
    "disable_vlcmu",
    "disable_eta_loss",
    "disable_purport",
)
_INFERENCE_FLAGS = ("passes", "workers")


def _add_logging(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
    )
    parser.add_argument("--log-format", choices=["json", "console"], default=None)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    _add_logging(parser)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Seed for every random draw")
    parser.add_argument("--lambda1", type=float, help="Weight of the correctness loss")
    parser.add_argument("--lambda2", type=float, help="Weight of the significance loss")
    parser.add_argument("--disable-vlcmu", action="store_true", default=None)
    parser.add_argument("--disable-eta-loss", action="store_true", default=None)
    parser.add_argument("--disable-purport", action="store_true", default=None)


def _add_inference_flags(parser: argparse.ArgumentParser, passes: bool = True) -> None:
    if passes:
        parser.add_argument("--passes", type=int, help="Peak-selection passes")
    parser.add_argument("--workers", type=int, help="Videos processed in parallel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synopsis",
        description="Dense captioning and text synopses of long segmented videos.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Generate a synthetic corpus")
    synth.add_argument("--spec", type=Path, required=True, help="SyntheticSpec JSON")
    synth.add_argument("--out", type=Path, required=True)
    synth.add_argument("--seed", type=int, help="Override the spec's seed")
    _add_logging(synth)

    train = sub.add_parser("train", help="Pretrain the captioner, then train jointly")
    train.add_argument("--corpus", type=Path, required=True)
    train.add_argument("--out", type=Path, required=True)
    _add_train_flags(train)
    _add_common(train)

    infer = sub.add_parser("infer", help="Write synopses for videos of a corpus")
    infer.add_argument("--model", type=Path, required=True)
    infer.add_argument("--corpus", type=Path, required=True)
    infer.add_argument("--out", type=Path, required=True)
    infer.add_argument("--video", help="Video id; default: the held-out videos")
    _add_inference_flags(infer)
    _add_common(infer)

    evaluate = sub.add_parser("eval", help="Score synopses against reference summaries")
    evaluate.add_argument("--synopsis", type=Path, nargs="+", required=True)
    evaluate.add_argument(
        "--references",
        type=Path,
        required=True,
        help="references.jsonl or a corpus dir",
    )
    evaluate.add_argument("--out", type=Path, required=True)
    _add_inference_flags(evaluate, passes=False)
    _add_common(evaluate)

    inspect = sub.add_parser("inspect", help="Print corpus statistics")
    inspect.add_argument("--corpus", type=Path, required=True)
    _add_logging(inspect)

    crossval = sub.add_parser("crossval", help="Leave-one-video-out evaluation")
    crossval.add_argument("--corpus", type=Path, required=True)
    crossval.add_argument("--out", type=Path, required=True)
    _add_train_flags(crossval)
    _add_inference_flags(crossval)
    _add_common(crossval)
    return parser


def flag_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Nested config overrides from the flags that were actually given."""
    overrides: dict[str, Any] = {}
    for section, names in (("train", _TRAIN_FLAGS), ("inference", _INFERENCE_FLAGS)):
        values = {
            name: getattr(args, name)
            for name in names
            if getattr(args, name, None) is not None
        }
        if values:
            overrides[section] = values
    logging_values = {
        key: value
        for key, value in (("level", args.log_level), ("format", args.log_format))
        if value is not None
    }
    if logging_values:
        overrides["logging"] = logging_values
    return overrides


def resolve_config(args: argparse.Namespace) -> RunConfig:
    path = args.config
    if path is None and args.command == "infer":
        saved = args.model / RUN_CONFIG_FILE
        path = saved if saved.exists() else None
    if path is not None and not path.exists():
        raise_not_found("config file", str(path))
    return RunConfig.load(path, **flag_overrides(args))


def run(args: argparse.Namespace, stdout: TextIO) -> int:
    if args.command == "synth":
        commands.cmd_synth(args.spec, args.out, args.seed)
        return EXIT_OK
    if args.command == "inspect":
        commands.cmd_inspect(args.corpus, stdout)
        return EXIT_OK

    config = resolve_config(args)
    setup_logging(config.logging.level, config.logging.format)
    logger.info("Configuration resolved", config_hash=config.config_hash())
    if args.command == "train":
        commands.cmd_train(config, args.corpus, args.out)
    elif args.command == "infer":
        commands.cmd_infer(
            config, args.model, args.corpus, args.out, args.video, stdout
        )
    elif args.command == "eval":
        commands.cmd_eval(config, args.synopsis, args.references, args.out, stdout)
    elif args.command == "crossval":
        commands.cmd_crossval(config, args.corpus, args.out, stdout)
    return EXIT_OK


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    level = args.log_level or "INFO"
    setup_logging(level, args.log_format or "json")
    clear_context()
    set_run_id(uuid.uuid4().hex[:12])
    get_metrics_collector().reset()

    handler = ErrorHandler(args.command, include_debug_info=level == "DEBUG")
    try:
        code = run(args, stdout or sys.stdout)
    except Exception as exc:
        return handler.handle(exc)
    logger.info("Command finished", command=args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
