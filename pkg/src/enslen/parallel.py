"""Order-preserving map over worker processes with per-task seeding."""
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def sample_rng(seed, index):
    """Generator for task ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def parallel_map(func, tasks, workers=1):
    """``list(map(func, tasks))``, optionally spread across processes.

    Results come back in task order, so reductions over them are identical
    for every worker count.
    """
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))
