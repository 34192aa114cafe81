"""Logging for gradfit: one named logger, stderr console, optional log files."""

import logging
import sys
from pathlib import Path
from typing import Optional

LOGGER_NAME = "gradfit"
CONSOLE_FORMAT = "[%(levelname)s] %(message)s"
FILE_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
FILE_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_FORWARDED = frozenset({"debug", "info", "warning", "error", "critical", "exception"})


class GradfitLogger:
    """
    Process-wide wrapper around the ``gradfit`` logger.

    The underlying logger stays at DEBUG so file handlers see everything;
    ``set_level`` and ``level`` act on the console handlers only.
    Message methods (``debug`` ... ``exception``) are forwarded unchanged.
    """

    _instance: Optional["GradfitLogger"] = None
    _logger: Optional[logging.Logger] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if self._logger is not None:
            return
        self._logger = logging.getLogger(LOGGER_NAME)
        self._logger.setLevel(logging.DEBUG)
        if not self._logger.handlers:
            console = logging.StreamHandler(sys.stderr)
            console.setLevel(logging.INFO)
            console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
            self._logger.addHandler(console)

    def __getattr__(self, name):
        if name in _FORWARDED:
            return getattr(self._logger, name)
        raise AttributeError(name)

    def _console_handlers(self):
        return [h for h in self._logger.handlers if not isinstance(h, logging.FileHandler)]

    @property
    def level(self) -> int:
        """Console level; the logger's own level when no console handler is attached."""
        consoles = self._console_handlers()
        return min(h.level for h in consoles) if consoles else self._logger.level

    def set_level(self, level: str):
        """Apply a level name to the console; unknown names mean INFO. File handlers keep DEBUG."""
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            resolved = logging.INFO
        self._logger.setLevel(logging.DEBUG)
        for handler in self._console_handlers():
            handler.setLevel(resolved)

    def enable_debug(self):
        self.set_level("DEBUG")

    def is_debug(self) -> bool:
        return self.level <= logging.DEBUG

    def add_file_handler(self, log_file: str):
        """Also write every record to ``log_file``, creating its directory."""
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(log_file, encoding="utf-8")
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=FILE_DATE_FORMAT))
        self._logger.addHandler(handler)


_logger: Optional[GradfitLogger] = None


def get_logger() -> GradfitLogger:
    global _logger
    if _logger is None:
        _logger = GradfitLogger()
    return _logger


def setup_logging(debug: bool = False, log_file: Optional[str] = None,
                  level: Optional[str] = None) -> GradfitLogger:
    """
    Configure the gradfit logger for one CLI run.

    Args:
        debug: DEBUG on the console; takes precedence over ``level``
        log_file: Optional path that receives a full DEBUG log
        level: Level name, e.g. from GRADFIT_LOG_LEVEL

    Returns:
        The configured logger
    """
    logger = get_logger()
    if debug:
        logger.enable_debug()
    elif level:
        logger.set_level(level)
    if log_file:
        logger.add_file_handler(log_file)
    return logger
