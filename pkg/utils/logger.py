"""
Logging Utility
---------------
Centralized logging setup for the toolkit.

Records are queued by a QueueHandler on the root logger and drained by a
QueueListener into a colored console handler (stderr) and a rotating log
file with structured or JSON-lines formatting. A YAML dictConfig can replace
the programmatic setup.
"""

import atexit
import logging
import logging.config
import logging.handlers
import queue
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from utils.log_formatters import ColoredFormatter, JsonFormatter, StructuredFormatter

# Default log directory
LOG_DIR = Path("data/logs")

_log_queue: "queue.Queue[logging.LogRecord]" = queue.Queue(-1)
_listener: Optional[logging.handlers.QueueListener] = None


def _stop_listener() -> None:
    global _listener
    if _listener is not None:
        _listener.stop()
        for handler in _listener.handlers:
            handler.close()
        _listener = None


def setup_logging(
    level: Union[int, str] = logging.INFO,
    log_file: Optional[Union[str, Path]] = None,
    use_json: bool = False,
    use_colors: bool = True,
    log_to_console: bool = True,
    log_dir: Optional[Union[str, Path]] = None,
    config_path: Optional[Union[str, Path]] = None,
    max_bytes: int = 10 * 1024 * 1024,
    backup_count: int = 5,
) -> logging.Logger:
    """
    Set up logging for the application.

    Args:
        level: The logging level (default: INFO)
        log_file: Path to the log file (default: auto-generated under log_dir)
        use_json: Write the log file as JSON lines instead of key=value
        use_colors: Color console output when the terminal supports it
        log_to_console: Also log to stderr
        log_dir: Directory for generated log files (default: data/logs)
        config_path: YAML dictConfig file that replaces the setup below

    Returns:
        The root logger
    """
    global LOG_DIR, _listener

    if log_dir is not None:
        LOG_DIR = Path(log_dir)
    if config_path is not None:
        return _configure_from_file(Path(config_path))

    LOG_DIR.mkdir(parents=True, exist_ok=True)
    if log_file is None:
        log_file = LOG_DIR / f"udn-{datetime.now().strftime('%Y%m%d-%H%M%S')}.log"

    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)

    _stop_listener()
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers = []

    file_handler = logging.handlers.RotatingFileHandler(
        log_file, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8"
    )
    file_handler.setLevel(level)
    file_handler.setFormatter(JsonFormatter() if use_json else StructuredFormatter())
    handlers: List[logging.Handler] = [file_handler]

    if log_to_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(ColoredFormatter(use_colors=use_colors))
        handlers.append(console_handler)

    _listener = logging.handlers.QueueListener(_log_queue, *handlers, respect_handler_level=True)
    _listener.start()
    root_logger.addHandler(logging.handlers.QueueHandler(_log_queue))
    atexit.register(_stop_listener)

    root_logger.debug(f"Logging initialized (level: {logging.getLevelName(level)}, file: {log_file})")
    return root_logger


def _configure_from_file(config_path: Path) -> logging.Logger:
    """Configure logging from a YAML dictConfig file."""
    with open(config_path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)
    for handler_config in config.get("handlers", {}).values():
        if "filename" in handler_config:
            Path(handler_config["filename"]).parent.mkdir(parents=True, exist_ok=True)
    _stop_listener()
    logging.config.dictConfig(config)
    root_logger = logging.getLogger()
    root_logger.debug(f"Logging configured from {config_path}")
    return root_logger


def get_logger(name: str, extra_data: Optional[Dict[str, Any]] = None):
    """
    Get a logger with the specified name.

    Args:
        name: The logger name
        extra_data: Optional context added to every record

    Returns:
        A logger, or a LoggerAdapter when extra_data is given
    """
    logger = logging.getLogger(name)
    if extra_data:
        return _ContextAdapter(logger, extra_data)
    return logger


class _ContextAdapter(logging.LoggerAdapter):
    """Adds fixed context to every record, merged with per-call extras."""

    def process(self, msg, kwargs):
        kwargs["extra"] = {**self.extra, **(kwargs.get("extra") or {})}
        return msg, kwargs


class RunLogger:
    """
    Per-run log file with named steps and numerical diagnostics.

    Writes data/logs/runs/<run_id>.log next to the main log.
    """

    def __init__(self, run_id: str, context: Optional[Dict[str, Any]] = None):
        self.run_id = run_id
        self.context = dict(context or {}, run_id=run_id)
        self.start_time = time.time()
        self.step_times: Dict[str, float] = {}
        self.current_step: Optional[str] = None
        self.step_start_time: Optional[float] = None

        self.log_file = LOG_DIR / "runs" / f"{run_id}.log"
        self.log_file.parent.mkdir(parents=True, exist_ok=True)
        base = logging.getLogger(f"run.{run_id}")
        base.setLevel(logging.DEBUG)
        self._handler = logging.FileHandler(self.log_file, encoding="utf-8")
        self._handler.setFormatter(StructuredFormatter(include_process_info=False))
        base.addHandler(self._handler)
        self.logger = _ContextAdapter(base, self.context)

        self.info(f"Run started: {run_id}")

    def info(self, message: str, **kwargs) -> None:
        self.logger.info(message, extra=kwargs or None)

    def warning(self, message: str, **kwargs) -> None:
        self.logger.warning(message, extra=kwargs or None)

    def error(self, message: str, exc_info: bool = False, **kwargs) -> None:
        self.logger.error(message, exc_info=exc_info, extra=kwargs or None)

    def debug(self, message: str, **kwargs) -> None:
        self.logger.debug(message, extra=kwargs or None)

    def start_step(self, step_name: str) -> None:
        """Start timing a named step, ending the current one."""
        if self.current_step:
            self.end_step()
        self.current_step = step_name
        self.step_start_time = time.time()
        self.info(f"Starting step: {step_name}")

    def end_step(self) -> None:
        if self.current_step and self.step_start_time:
            duration = time.time() - self.step_start_time
            self.step_times[self.current_step] = duration
            self.info(f"Finished step: {self.current_step}", duration=duration, step=self.current_step)
            self.current_step = None
            self.step_start_time = None

    def log_metric(self, name: str, value: Any, unit: Optional[str] = None) -> None:
        """Record a numerical diagnostic (quadrature error, resample count, bracket, ...)."""
        self.info(f"Metric: {name} = {value}{f' {unit}' if unit else ''}",
                  metric_name=name, metric_value=value, metric_unit=unit)

    def get_logs(self, max_lines: int = 100) -> List[str]:
        self._handler.flush()
        if not self.log_file.exists():
            return []
        with open(self.log_file, "r", encoding="utf-8") as f:
            lines = f.readlines()
        return lines[-max_lines:] if max_lines > 0 else lines

    def get_metrics(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "duration": time.time() - self.start_time,
            "steps": self.step_times.copy(),
        }

    def finish(self, status: str = "completed", error: Optional[BaseException] = None) -> Dict[str, Any]:
        """Close the run log and return its timing summary."""
        if self.current_step:
            self.end_step()
        duration = time.time() - self.start_time
        if error is not None:
            self.error(f"Run failed: {self.run_id}", duration=duration, error=str(error))
        else:
            self.info(f"Run {status}: {self.run_id}", duration=duration, status=status)
        metrics = self.get_metrics()
        self.logger.logger.removeHandler(self._handler)
        self._handler.close()
        return metrics
