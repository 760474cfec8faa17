"""
Metrics Collection
------------------
In-process collection of named numerical metrics (durations, evaluation
counts, quadrature error estimates) with bounded histories and JSON export.
"""

import datetime
import json
import os
import threading
import time
from collections import defaultdict, deque
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from utils.logger import get_logger
from utils.settings import get_settings

HISTORY_LENGTH = 1000


class MetricsCollector:
    """
    Thread-safe store of metric histories.

    Args:
        storage_path: Directory used by save_metrics for default and relative paths
        history_length: Entries kept per metric
    """

    def __init__(self, storage_path: Union[str, Path] = "data/metrics", history_length: int = HISTORY_LENGTH):
        self.storage_path = Path(storage_path)
        self.metric_histories: Dict[str, deque] = defaultdict(lambda: deque(maxlen=history_length))
        self.lock = threading.RLock()
        self.logger = get_logger("monitoring.metrics")

    def record_metric(self, name: str, value: Union[int, float], category: Optional[str] = None):
        """
        Record a metric value.

        Args:
            name: Metric name
            value: Metric value
            category: Optional category, prefixed as "<category>.<name>"
        """
        metric_name = f"{category}.{name}" if category else name
        with self.lock:
            self.metric_histories[metric_name].append((time.time(), value))
        self.logger.debug(f"Metric: {metric_name}={value}")

    def get_metric_history(self, metric_name: str, limit: int = 100) -> List[Tuple[float, Any]]:
        """Most recent (unix time, value) entries of a metric."""
        with self.lock:
            history = list(self.metric_histories.get(metric_name, []))
        return history[-limit:]

    def get_all_metrics(self) -> Dict[str, List[Tuple[float, Any]]]:
        with self.lock:
            return {name: list(history) for name, history in self.metric_histories.items()}

    def save_metrics(self, path: Optional[Union[str, Path]] = None) -> Optional[Path]:
        """
        Write all histories as JSON.

        Args:
            path: Target file (default: metrics-<date>.json under storage_path;
                relative paths are taken under storage_path too)

        Returns:
            The written path, or None when nothing was recorded
        """
        with self.lock:
            if not self.metric_histories:
                return None
            payload = {
                name: [
                    {"timestamp": datetime.datetime.fromtimestamp(ts).isoformat(), "value": value}
                    for ts, value in history
                ]
                for name, history in self.metric_histories.items()
            }
        if path is None:
            today = datetime.datetime.now().strftime("%Y-%m-%d")
            path = f"metrics-{today}.json"
        path = Path(path)
        if not path.is_absolute():
            path = self.storage_path / path
        os.makedirs(path.parent, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, default=float)
        self.logger.info(f"Saved {len(payload)} metrics to {path}")
        return path


# Singleton instance
_metrics_collector: Optional[MetricsCollector] = None
_collector_lock = threading.Lock()


def get_metrics_collector() -> MetricsCollector:
    """
    Get the singleton metrics collector instance.

    Returns:
        MetricsCollector instance
    """
    global _metrics_collector
    with _collector_lock:
        if _metrics_collector is None:
            _metrics_collector = MetricsCollector(get_settings().metrics_dir)
    return _metrics_collector


def record_metric(name: str, value: Union[int, float], category: Optional[str] = None):
    get_metrics_collector().record_metric(name, value, category)


def get_all_metrics() -> Dict[str, List[Tuple[float, Any]]]:
    return get_metrics_collector().get_all_metrics()


def save_metrics(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    return get_metrics_collector().save_metrics(path)
