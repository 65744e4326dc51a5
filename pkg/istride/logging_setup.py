"""
Structured JSON logging on standard error.

Standard output is reserved for reports and catalogs, so every log record is a single
JSON object on stderr. Call sites attach context with
``extra={"extra_payload": {...}}``; the active CLI subcommand is stamped on each record.
"""

from __future__ import annotations

import json
import logging
import sys
from datetime import datetime, timezone
from typing import IO, Any, Dict, Optional

RESERVED_KEYS = frozenset({"timestamp", "level", "logger", "message", "command"})


class CommandFilter(logging.Filter):
    """Attach the running subcommand to every record."""

    def __init__(self, command: Optional[str]):
        super().__init__()
        self.command = command

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.command
        return True


class JsonLogFormatter(logging.Formatter):
    """One JSON object per record; payload keys never shadow the fixed ones."""

    def format(self, record: logging.LogRecord) -> str:
        log_payload: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        command = getattr(record, "command", None)
        if command:
            log_payload["command"] = command

        if record.exc_info:
            log_payload["exc_info"] = self.formatException(record.exc_info)

        extra_payload = getattr(record, "extra_payload", None)
        if isinstance(extra_payload, dict):
            for key, value in extra_payload.items():
                log_payload[f"extra_{key}" if key in RESERVED_KEYS else key] = value

        # Paths, dates and enums in payloads are rendered with str().
        return json.dumps(log_payload, ensure_ascii=False, default=str)


def configure_logging(
    log_level: str, command: Optional[str] = None, stream: Optional[IO[str]] = None
) -> None:
    """Route root logging to ``stream`` (stderr by default) as JSON lines."""
    level = getattr(logging, log_level.upper(), logging.WARNING)

    root_logger = logging.getLogger()
    if root_logger.handlers:
        root_logger.handlers.clear()

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JsonLogFormatter())
    handler.addFilter(CommandFilter(command))

    root_logger.setLevel(level)
    root_logger.addHandler(handler)
