# mm/core/task_manager.py
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from typing import Any, Callable, List, Optional, Sequence, Tuple

from loguru import logger

from .errors import ContractViolation


class BackgroundTaskManager:
    """Manages the executor lifecycle for one parallel run.

    Every task is a top-level function plus its arguments, so the same task
    list runs on processes (real CPU parallelism) or threads. `run_tasks` is
    the barrier: it returns only when every task has finished, with results
    in submission order regardless of completion order.
    """

    def __init__(self, n_workers: int, executor: str = "process"):
        if n_workers < 1:
            raise ContractViolation(f"n_workers must be >= 1, got {n_workers}")
        if executor not in ("process", "thread"):
            raise ContractViolation(f"Unknown executor kind '{executor}'")
        self.n_workers = n_workers
        self.executor_kind = executor
        self._executor: Optional[Executor] = None

    def __enter__(self) -> "BackgroundTaskManager":
        if self.executor_kind == "process":
            self._executor = ProcessPoolExecutor(max_workers=self.n_workers)
        else:
            self._executor = ThreadPoolExecutor(max_workers=self.n_workers, thread_name_prefix="mm-worker")
        logger.debug(f"BackgroundTaskManager: Started {self.executor_kind} pool with {self.n_workers} workers.")
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=exc_type is not None)
            self._executor = None
            logger.debug("BackgroundTaskManager: Pool shut down.")

    def run_tasks(self, tasks: Sequence[Tuple[Callable[..., Any], tuple]]) -> List[Any]:
        if self._executor is None:
            raise RuntimeError("BackgroundTaskManager used outside its context")
        results: List[Any] = [None] * len(tasks)
        future_to_index = {self._executor.submit(fn, *args): index for index, (fn, args) in enumerate(tasks)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as exc:
                logger.error(f"BackgroundTaskManager: Task {index} raised {exc!r}")
                raise
        return results
