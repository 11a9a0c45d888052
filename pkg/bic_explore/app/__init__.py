from __future__ import annotations

import logging
import sys
from typing import Optional

from ..config import (
    VERSION,
    RunConfig,
    consume_load_warnings,
    get_runtime_paths,
    parse_config,
)
from ..errors import BicExploreError
from ..logging_setup import build_fallback_logger, check_logging_setup, setup_logging
from .cli import build_parser
from .report import RunOutcome, emit_outcome_text
from .runner import run

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_AUDIT_FAILED = 2


def _write_stdout_text(text: str) -> None:
    stream = getattr(sys, "stdout", None)
    if stream is None:
        return
    try:
        stream.write(text)
        if not text.endswith("\n"):
            stream.write("\n")
        stream.flush()
    except Exception:
        pass


def _write_stderr_text(text: str) -> None:
    stream = getattr(sys, "stderr", None)
    if stream is not None:
        stream.write(text if text.endswith("\n") else f"{text}\n")


def _load_config(path: Optional[str]) -> RunConfig:
    if path:
        return RunConfig.load(path)
    return parse_config(RunConfig.default_json())


def _init_logging(config: RunConfig) -> tuple[logging.Logger, str]:
    log_file = get_runtime_paths(config.out_dir).log_file
    ok, detail = check_logging_setup(log_file)
    try:
        if ok:
            return setup_logging(config.log_level, log_file), ""
        return setup_logging(config.log_level), f"log file unavailable ({detail}); logging to stderr only"
    except Exception as exc:
        return build_fallback_logger(config.log_level, exc.__class__.__name__)


def _flush_load_warnings(logger: logging.Logger) -> None:
    for warning in consume_load_warnings():
        logger.warning(warning)


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv if argv is not None else sys.argv[1:])
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT_ERROR

    if args.print_default_config:
        _write_stdout_text(RunConfig.default_json())
        return EXIT_OK

    try:
        config = _load_config(args.config).with_overrides(
            mode=args.mode,
            out_dir=args.out,
            seed=args.seed,
            replications=args.reps,
            tolerance=args.tol,
            horizon=args.horizon,
            log_level=args.log_level,
        )
    except BicExploreError as exc:
        _write_stderr_text(f"config error: {exc}")
        return EXIT_INPUT_ERROR

    logger, logging_warning = _init_logging(config)
    if logging_warning:
        logger.warning(logging_warning)
    _flush_load_warnings(logger)

    try:
        outcome: RunOutcome = run(config)
    except BicExploreError as exc:
        logger.error("%s: %s", exc.__class__.__name__, exc)
        return EXIT_INPUT_ERROR
    except OSError as exc:
        logger.error("i/o failure: %s", exc)
        return EXIT_INPUT_ERROR
    finally:
        _flush_load_warnings(logger)

    emit_outcome_text(outcome, _write_stdout_text)
    if outcome.exit_code == EXIT_AUDIT_FAILED:
        logger.warning("audit failed; see %s", get_runtime_paths(config.out_dir).audit_json)
    return outcome.exit_code


__all__ = ["main", "build_parser", "run", "VERSION", "EXIT_OK", "EXIT_INPUT_ERROR", "EXIT_AUDIT_FAILED"]
