"""
Log Formatters
--------------
Structured (key=value), JSON-lines and colored console formatters.
"""

import datetime
import json
import logging
import os
import socket
import sys
import traceback
from typing import Any, Dict

APP_NAME = os.getenv("APP_NAME", "udn-capacity")

# LogRecord attributes that are not user-supplied extras.
_RESERVED = frozenset((
    "args", "asctime", "created", "exc_info", "exc_text", "filename", "funcName", "id",
    "levelname", "levelno", "lineno", "module", "msecs", "msg", "message", "name", "pathname",
    "process", "processName", "relativeCreated", "stack_info", "thread", "threadName",
    "taskName",
))


def _extras(record: logging.LogRecord) -> Dict[str, Any]:
    return {k: v for k, v in record.__dict__.items() if k not in _RESERVED and not k.startswith("_")}


class StructuredFormatter(logging.Formatter):
    """
    One line per record: `timestamp=... | level=... | logger=... | message=...`
    followed by any extra attributes passed with the record.
    """

    def __init__(self, include_process_info: bool = True):
        super().__init__()
        self.include_process_info = include_process_info
        self.hostname = socket.gethostname()

    def format(self, record: logging.LogRecord) -> str:
        output: Dict[str, Any] = {
            "timestamp": datetime.datetime.fromtimestamp(record.created).isoformat(timespec="milliseconds"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "app": APP_NAME,
            "host": self.hostname,
        }
        if self.include_process_info:
            output["pid"] = record.process
        output["location"] = f"{record.pathname}:{record.lineno}"
        if record.exc_info:
            output["exception"] = {
                "type": record.exc_info[0].__name__,
                "value": str(record.exc_info[1]),
                "traceback": traceback.format_tb(record.exc_info[2]),
            }
        for key, value in _extras(record).items():
            output.setdefault(key, value)

        parts = []
        for key, value in output.items():
            if isinstance(value, (dict, list, tuple)):
                value = json.dumps(value, default=str)
            parts.append(f"{key}={self._format_value(value)}")
        return " | ".join(parts)

    @staticmethod
    def _format_value(value: Any) -> str:
        if value is None:
            return "null"
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, (int, float)):
            return repr(value)
        text = str(value)
        if any(ch in text for ch in ' |="\''):
            escaped = text.replace('"', '\\"')
            return f'"{escaped}"'
        return text


class JsonFormatter(logging.Formatter):
    """JSON-lines formatter for log shipping."""

    def __init__(self, indent=None):
        super().__init__()
        self.indent = indent
        self.hostname = socket.gethostname()

    def format(self, record: logging.LogRecord) -> str:
        output: Dict[str, Any] = {
            "@timestamp": datetime.datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "app": APP_NAME,
            "host": self.hostname,
            "process": {"id": record.process, "name": record.processName},
            "origin": {"file": record.pathname, "line": record.lineno, "function": record.funcName},
        }
        if record.exc_info:
            exc_type, exc_value, exc_tb = record.exc_info
            output["error"] = {
                "type": exc_type.__name__,
                "message": str(exc_value),
                "stacktrace": "".join(traceback.format_tb(exc_tb)) if exc_tb else None,
            }
        for key, value in _extras(record).items():
            output.setdefault(key, value)
        return json.dumps(output, default=self._json_default, indent=self.indent)

    @staticmethod
    def _json_default(obj: Any) -> Any:
        if isinstance(obj, (datetime.datetime, datetime.date)):
            return obj.isoformat()
        if isinstance(obj, (set, tuple)):
            return list(obj)
        if hasattr(obj, "item"):
            # numpy scalars
            return obj.item()
        if hasattr(obj, "tolist"):
            return obj.tolist()
        return str(obj)


class ColoredFormatter(logging.Formatter):
    """ANSI-colored `time - logger - LEVEL - message` lines for terminals."""

    RESET = "\033[0m"
    LEVEL_COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m\033[1m",
        "ERROR": "\033[31m\033[1m",
        "CRITICAL": "\033[41m\033[37m\033[1m",
    }
    TIME_COLOR = "\033[90m"
    LOGGER_COLOR = "\033[34m"

    def __init__(self, fmt=None, datefmt=None, style="%", use_colors: bool = True):
        if fmt is None:
            fmt = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        super().__init__(fmt, datefmt, style)
        self.use_colors = use_colors and self._supports_color(sys.stderr)

    def format(self, record: logging.LogRecord) -> str:
        formatted = super().format(record)
        if not self.use_colors:
            return formatted
        level_color = self.LEVEL_COLORS.get(record.levelname, self.RESET)
        parts = formatted.split(" - ", 3)
        if len(parts) == 4:
            timestamp, name, level, message = parts
            return (f"{self.TIME_COLOR}{timestamp}{self.RESET} - {self.LOGGER_COLOR}{name}{self.RESET} - "
                    f"{level_color}{level}{self.RESET} - {message}")
        return f"{level_color}{formatted}{self.RESET}"

    def formatTime(self, record, datefmt=None):
        ct = datetime.datetime.fromtimestamp(record.created)
        if datefmt:
            return ct.strftime(datefmt)
        return ct.strftime("%Y-%m-%d %H:%M:%S.%f")[:-3]

    @staticmethod
    def _supports_color(stream) -> bool:
        if not (hasattr(stream, "isatty") and stream.isatty()):
            return False
        if "NO_COLOR" in os.environ:
            return False
        return sys.platform != "win32" and os.environ.get("TERM") not in ("dumb", "emacs")
