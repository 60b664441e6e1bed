"""
Replica Execution Service
Runs independent replicas on a thread pool, one random stream per replica
"""
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional

import numpy as np

from .config import get_settings
from .rng import make_stream
from .utils.logger import get_logger

logger = get_logger(__name__)


def run_replicas(task: Callable[[int, np.random.Generator], Any], seed: int, replicas: int,
                 workers: Optional[int] = None) -> List[Any]:
    """
    Run task(replica_index, rng) for every replica

    Results come back ordered by replica index, so output depends only on the seed.

    Args:
        task: Callable receiving the replica index and its stream
        seed: Base seed; replica i uses stream (seed, i)
        replicas: Number of replicas
        workers: Thread count; defaults to settings.MAX_WORKERS

    Returns:
        List of task results in replica order
    """
    if replicas < 1:
        return []
    workers = workers or get_settings().MAX_WORKERS
    workers = max(1, min(workers, replicas))

    def run_one(index: int):
        try:
            return task(index, make_stream(seed, index))
        except Exception as e:
            logger.error(f"[ERROR] Replica {index} failed: {e}")
            logger.error(traceback.format_exc())
            raise

    if workers == 1:
        return [run_one(i) for i in range(replicas)]

    logger.debug(f"Running {replicas} replicas on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_one, i) for i in range(replicas)]
        return [future.result() for future in futures]
