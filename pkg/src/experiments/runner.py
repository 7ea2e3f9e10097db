"""
runner.py
---------
Fan-out of independent per-network tasks.

Results come back in task order (Executor.map keeps submission order), so the
merged output does not depend on the worker count or on completion order.
Every task derives its own random streams from (seed, tag, index); nothing
random is shared between tasks.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from src.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_tasks(worker: Callable[[T], R], tasks: Sequence[T], threads: int = 1) -> List[R]:
    """Apply a module-level `worker` to every task; `threads` <= 1 runs inline."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        logger.info("running %d tasks inline", len(tasks))
        return [worker(t) for t in tasks]

    workers = min(threads, len(tasks))
    chunksize = max(1, len(tasks) // (workers * 4))
    logger.info("running %d tasks on %d worker processes", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=chunksize))
