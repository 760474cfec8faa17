"""
Trial Worker Pool
-----------------
Runs Monte Carlo trials in contiguous chunks on a process pool.

Each trial draws from its own generator derived from (seed, trial index), and
chunk results are reassembled in trial order, so a run gives bit-identical
output whatever the number of workers.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from utils.logger import get_logger
from utils.settings import get_settings

ChunkFn = Callable[..., Any]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of a seeded run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def chunk_bounds(n_trials: int, n_chunks: int) -> List[Tuple[int, int]]:
    """Split range(n_trials) into at most n_chunks contiguous [start, stop) pieces."""
    n_chunks = max(1, min(n_chunks, n_trials))
    edges = np.linspace(0, n_trials, n_chunks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class WorkerPool:
    """
    Process pool for embarrassingly parallel trial farms.

    Args:
        workers: Number of processes; 1 runs inline, None uses UDN_WORKERS (default 1)
        chunks_per_worker: Granularity of the work split
        progress: Show a tqdm progress bar
    """

    def __init__(self, workers: Optional[int] = None, chunks_per_worker: int = 4,
                 progress: bool = False):
        if workers is None:
            workers = get_settings().workers
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.chunks_per_worker = chunks_per_worker
        self.progress = progress
        self.logger = get_logger(__name__)

    def map_trials(self, fn: ChunkFn, n_trials: int, args: Sequence[Any] = (),
                   desc: str = "trials") -> List[Any]:
        """
        Call fn(start, stop, *args) on every chunk of range(n_trials).

        Returns:
            Chunk results in trial order
        """
        if n_trials < 1:
            raise ValueError(f"need at least one trial, got {n_trials}")
        n_chunks = self.workers * self.chunks_per_worker if self.workers > 1 else 1
        bounds = chunk_bounds(n_trials, n_chunks)

        if self.workers == 1:
            return [fn(start, stop, *args) for start, stop in bounds]

        self.logger.debug(f"Running {n_trials} {desc} in {len(bounds)} chunks on {self.workers} workers")
        results: List[Any] = [None] * len(bounds)
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(fn, start, stop, *args): i for i, (start, stop) in enumerate(bounds)}
            with tqdm(total=n_trials, desc=desc, disable=not self.progress, leave=False) as bar:
                for future, i in futures.items():
                    results[i] = future.result()
                    start, stop = bounds[i]
                    bar.update(stop - start)
        return results
