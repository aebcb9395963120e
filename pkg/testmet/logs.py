from __future__ import annotations

import enum
import typing as t

from loguru import logger
from rich.text import Text

from testmet import utils

if t.TYPE_CHECKING:
    from pathlib import Path

_FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{line} - {message}"
)


class LoggingLevel(enum.Enum):
    TRACE = "trace"
    """Per-node parser and per-split tree detail; very noisy."""
    DEBUG = "debug"
    INFO = "info"
    SUCCESS = "success"
    WARNING = "warning"
    """Skipped files, dropped records and degenerate correlations."""
    ERROR = "error"
    CRITICAL = "critical"

    def as_int(self) -> int:
        return logger.level(self.name).no


def setup_logging(
    log_level: LoggingLevel, log_file: Path | None = None
) -> None:  # pragma: no cover
    """Route loguru through the shared console, and optionally a file.

    The file sink is plain text and always records ``debug`` and above, so a
    report bundle can ship with the log that produced it.
    """
    logger.remove()
    _ = logger.add(
        lambda s: utils.console.print(Text.from_ansi(s), end=""),
        level=log_level.as_int(),
        colorize=utils.console.is_terminal,
        backtrace=True,
        diagnose=log_level is LoggingLevel.TRACE,
    )
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        _ = logger.add(
            log_file,
            level=min(log_level.as_int(), LoggingLevel.DEBUG.as_int()),
            format=_FILE_FORMAT,
            encoding="utf-8",
            mode="w",
        )
    logger.debug(f"Logging at {log_level.value}")
