"""
Parallel execution of Monte Carlo replications and leave-one-out folds.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional


logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]


def run_replications(
    count: int,
    process_func: Callable[[int], Dict[str, Any]],
    max_workers: int = 4,
    progress_callback: Optional[ProgressCallback] = None
) -> List[Dict[str, Any]]:
    """
    Run process_func(index) for index in range(count) using ThreadPoolExecutor.

    Args:
        count: Number of tasks
        process_func: Function of the task index returning a result dict
        max_workers: Maximum number of parallel workers
        progress_callback: Called with (completed, total) after every task

    Returns:
        Results ordered by task index; a task that raised is recorded as
        {'run': index, 'success': False, 'error': message}
    """
    results: List[Optional[Dict[str, Any]]] = [None] * count

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {
            executor.submit(process_func, index): index
            for index in range(count)
        }

        completed = 0
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                # Keep going with the other tasks
                logger.warning("Task %d failed: %s", index, e)
                results[index] = {
                    'run': index,
                    'success': False,
                    'error': str(e),
                }

            completed += 1
            if progress_callback:
                progress_callback(completed, count)

    return results
