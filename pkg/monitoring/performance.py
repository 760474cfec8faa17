"""
Performance Monitoring
----------------------
Timing of quadratures, simulator batches and optimizer evaluations.

Durations are recorded as `<name>_duration` metrics and outcomes as
`<name>_success` / `<name>_failure` counts under the tracker's category.
"""

import functools
import logging
import time
from typing import Dict, List, Optional

from monitoring.metrics import get_all_metrics, record_metric


class PerformanceTracker:
    """
    Tracks execution time of functions and code blocks.

    Args:
        category: Metric category (default: "performance")
    """

    def __init__(self, category: Optional[str] = None):
        self.category = category or "performance"
        self.logger = logging.getLogger("monitoring.performance")

    def _record(self, name: str, duration: float, success: bool, log_level: int, kind: str):
        record_metric(f"{name}_duration", duration, self.category)
        outcome = "success" if success else "failure"
        record_metric(f"{name}_{outcome}", 1, self.category)
        self.logger.log(log_level, f"{kind} '{self.category}.{name}' execution time: {duration:.4f} seconds")

    def track(self, name: Optional[str] = None, log_level: int = logging.DEBUG):
        """
        Decorator for tracking the performance of a function.

        Args:
            name: Optional metric name (defaults to function name)
            log_level: Log level for performance logs
        """
        def decorator(func):
            metric_name = name or func.__name__

            @functools.wraps(func)
            def wrapper(*args, **kwargs):
                start_time = time.perf_counter()
                success = False
                try:
                    result = func(*args, **kwargs)
                    success = True
                    return result
                finally:
                    self._record(metric_name, time.perf_counter() - start_time, success, log_level, "Function")

            return wrapper

        return decorator

    def track_context(self, name: str, log_level: int = logging.DEBUG) -> "_PerformanceContext":
        """Context manager for tracking the performance of a code block."""
        return _PerformanceContext(self, name, log_level)


class _PerformanceContext:
    def __init__(self, tracker: PerformanceTracker, name: str, log_level: int):
        self.tracker = tracker
        self.name = name
        self.log_level = log_level
        self.start_time: Optional[float] = None
        self.duration: Optional[float] = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time is None:
            return
        self.duration = time.perf_counter() - self.start_time
        self.tracker._record(self.name, self.duration, exc_type is None, self.log_level, "Block")


def report_stats(category: str = "performance") -> Dict[str, Dict[str, float]]:
    """
    Count, total and mean of every duration metric in a category.

    Returns:
        {name: {"count": n, "total": seconds, "mean": seconds}}
    """
    prefix = f"{category}."
    stats: Dict[str, Dict[str, float]] = {}
    for name, history in get_all_metrics().items():
        if not (name.startswith(prefix) and name.endswith("_duration")):
            continue
        values: List[float] = [v for _, v in history]
        short = name[len(prefix):-len("_duration")]
        stats[short] = {"count": len(values), "total": sum(values), "mean": sum(values) / len(values)}
    return stats
