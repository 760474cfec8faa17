"""
Monitoring
----------
Metrics collection and performance timing for long numerical runs.
"""

from monitoring.metrics import MetricsCollector, get_all_metrics, get_metrics_collector, record_metric, save_metrics
from monitoring.performance import PerformanceTracker, report_stats

__all__ = [
    # Metrics
    "MetricsCollector", "get_metrics_collector", "record_metric", "get_all_metrics", "save_metrics",

    # Performance tracking
    "PerformanceTracker", "report_stats",
]
