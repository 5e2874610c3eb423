"""Logging configuration for sleepcomb.

All console output from the logging system goes to stderr. Stdout belongs to the
CLI's machine-readable output (verdict lines and the key=value summary), so the
two never interleave.

Usage:
    from sleepcomb.logging import get_logger
    logger = get_logger(__name__)
    logger.info("Game finished after %d rounds", rounds)
"""

import atexit
import logging
import os
import sys
import threading
import warnings
from pathlib import Path
from typing import Optional, Set, Union

DEFAULT_LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DEFAULT_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_LEVEL_ENV = "SLEEPCOMB_LOG_LEVEL"

VERBOSE_LEVEL = 15  # per-game progress, between DEBUG and INFO
logging.addLevelName(VERBOSE_LEVEL, "VERBOSE")
setattr(logging, "VERBOSE", VERBOSE_LEVEL)

_handlers: Set[logging.Handler] = set()
_handler_lock = threading.Lock()


def _release(handler: logging.Handler, root_logger: logging.Logger) -> None:
    try:
        root_logger.removeHandler(handler)
        handler.close()
    except Exception as e:
        warnings.warn(f"Could not close log handler {handler}: {e}", RuntimeWarning)
    finally:
        _handlers.discard(handler)


def _cleanup_handlers() -> None:
    """Close and detach every handler installed by setup_logging."""
    with _handler_lock:
        root_logger = logging.getLogger()
        for handler in list(_handlers):
            _release(handler, root_logger)


atexit.register(_cleanup_handlers)


def resolve_level(log_level: Union[str, int, None]) -> int:
    """Turn a level name or number into a logging level.

    ``None`` reads ``SLEEPCOMB_LOG_LEVEL`` and falls back to WARNING. Unknown
    names warn and resolve to INFO.
    """
    if log_level is None:
        log_level = os.environ.get(LOG_LEVEL_ENV, "WARNING")
    if isinstance(log_level, int):
        return log_level
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        warnings.warn(f"Invalid log level {log_level}, using INFO", RuntimeWarning)
        return logging.INFO
    return level


def _open_log_file(path: str) -> Optional[logging.Handler]:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        return logging.FileHandler(path, encoding="utf-8")
    except OSError as e:
        warnings.warn(f"Cannot write log file {path}: {e}", RuntimeWarning)
        return None


def setup_logging(
    log_level: Union[str, int, None] = "WARNING",
    log_file: Optional[str] = None,
    log_format: str = DEFAULT_LOG_FORMAT,
) -> None:
    """Configure the root logger.

    Args:
        log_level: Minimum level (DEBUG, VERBOSE, INFO, WARNING, ERROR, CRITICAL),
            as a name or an integer. ``None`` defers to ``SLEEPCOMB_LOG_LEVEL``.
        log_file: Optional path; receives every record down to DEBUG.
        log_format: Format string shared by all handlers.
    """
    root_logger = logging.getLogger()
    level = resolve_level(log_level)
    root_logger.setLevel(level)
    formatter = logging.Formatter(log_format, DEFAULT_DATE_FORMAT)

    installed = [(logging.StreamHandler(sys.stderr), level)]
    if log_file:
        file_handler = _open_log_file(log_file)
        if file_handler is not None:
            installed.append((file_handler, logging.DEBUG))

    with _handler_lock:
        for handler in list(_handlers):
            _release(handler, root_logger)
        for handler, handler_level in installed:
            handler.setFormatter(formatter)
            handler.setLevel(handler_level)
            root_logger.addHandler(handler)
            _handlers.add(handler)


def get_logger(name: str) -> logging.Logger:
    """Get a logger for a sleepcomb module (typically ``__name__``)."""
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    return logger
