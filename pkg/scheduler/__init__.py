"""
Scheduler Package Initialization
--------------------------------
Deterministic process pool for Monte Carlo trial farms.
"""

from scheduler.pool import WorkerPool, chunk_bounds, trial_rng

__all__ = [
    "WorkerPool",
    "chunk_bounds",
    "trial_rng",
]
