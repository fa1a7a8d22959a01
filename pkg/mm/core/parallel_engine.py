# mm/core/parallel_engine.py
"""Data-parallel metric computation over id-range partitions.

Compute phase: each worker owns one contiguous id range and writes only its
own LocalBuffer. Barrier: every compute task has returned. Compaction phase:
each worker reserves a slot range in the global output with one fetch-and-add
on the shared cursor, copies its entries, and the result is sorted by (i, j).
Outputs equal the sequential reference in metrics_engine exactly.
"""
from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterator, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.sparse import coo_matrix, csr_matrix

from .background_tasks import (
    ClassRangeResult, LocalBuffer, PropertyIndex, class_range_task, fan_range_task, similarity_range_task,
)
from .errors import ContractViolation
from .facts_model import DependencyTable, SystemModel
from .metrics_engine import MetricsReport, SimilarityEntry, estimate_workload
from .task_manager import BackgroundTaskManager


# --- Partitioning ---

@dataclass(frozen=True)
class PartitionPlan:
    n_items: int
    n_workers: int
    assignments: Tuple[Tuple[int, int], ...]

    def sizes(self) -> List[int]:
        return [end - start for start, end in self.assignments]

    def busy(self) -> List[Tuple[int, Tuple[int, int]]]:
        """(worker, range) pairs with at least one item."""
        return [(w, r) for w, r in enumerate(self.assignments) if r[1] > r[0]]


def plan_partition(n_items: int, n_workers: int) -> PartitionPlan:
    """Balanced contiguous ranges; the first n_items % n_workers workers take one extra item."""
    if n_workers < 1:
        raise ContractViolation(f"n_workers must be >= 1, got {n_workers}")
    if n_items < 0:
        raise ContractViolation(f"n_items must be >= 0, got {n_items}")
    base, extra = divmod(n_items, n_workers)
    assignments = []
    start = 0
    for w in range(n_workers):
        end = start + base + (1 if w < extra else 0)
        assignments.append((start, end))
        start = end
    return PartitionPlan(n_items, n_workers, tuple(assignments))


# --- Compaction ---

class AtomicCursor:
    """The single shared counter; mutated only through fetch_add."""

    def __init__(self) -> None:
        self._value = 0
        self._lock = threading.Lock()

    def fetch_add(self, amount: int) -> int:
        with self._lock:
            previous = self._value
            self._value += amount
            return previous

    @property
    def value(self) -> int:
        with self._lock:
            return self._value


class GlobalOutput:
    """Preallocated result columns filled by compaction.

    With `checked`, every write must fall inside a slot range the same worker
    reserved earlier; anything else raises ContractViolation.
    """

    def __init__(self, capacity: int, checked: bool = False):
        self.capacity = capacity
        self.checked = checked
        self.cursor = AtomicCursor()
        self.i = np.empty(capacity, dtype=np.int64)
        self.j = np.empty(capacity, dtype=np.int64)
        self.values = np.empty(capacity, dtype=np.float64)
        self._reservations: Dict[int, List[Tuple[int, int]]] = {}
        self._reservations_lock = threading.Lock()

    def reserve(self, owner: int, length: int) -> int:
        start = self.cursor.fetch_add(length)
        if start + length > self.capacity:
            raise ContractViolation(f"Reservation [{start}, {start + length}) exceeds capacity {self.capacity}")
        if self.checked:
            with self._reservations_lock:
                self._reservations.setdefault(owner, []).append((start, start + length))
        return start

    def write(self, owner: int, start: int, buffer: LocalBuffer) -> None:
        i, j, values = buffer.columns()
        end = start + i.size
        if self.checked:
            with self._reservations_lock:
                ranges = list(self._reservations.get(owner, ()))
            if not any(lo <= start and end <= hi for lo, hi in ranges):
                raise ContractViolation(f"Worker {owner} wrote [{start}, {end}) outside its reserved slots {ranges}")
        self.i[start:end] = i
        self.j[start:end] = j
        self.values[start:end] = values

    def sorted_entries(self) -> Tuple[SimilarityEntry, ...]:
        filled = self.cursor.value
        order = np.lexsort((self.j[:filled], self.i[:filled]))
        return tuple(
            SimilarityEntry(a, b, v)
            for a, b, v in zip(self.i[order].tolist(), self.j[order].tolist(), self.values[order].tolist())
        )


def _compact_one(output: GlobalOutput, buffer: LocalBuffer) -> None:
    start = output.reserve(buffer.owner, len(buffer))
    output.write(buffer.owner, start, buffer)


def compact(buffers: List[LocalBuffer], checked: bool = False) -> GlobalOutput:
    """Runs after the barrier: one reservation per worker, then a concurrent copy."""
    output = GlobalOutput(sum(len(b) for b in buffers), checked=checked)
    if not buffers:
        return output
    with ThreadPoolExecutor(max_workers=len(buffers), thread_name_prefix="mm-compact") as pool:
        for future in [pool.submit(_compact_one, output, buffer) for buffer in buffers]:
            future.result()
    return output


# --- Run bookkeeping ---

@dataclass
class ParallelRunStats:
    n_workers: int
    executor: str
    buffer_lengths: List[int] = field(default_factory=list)
    pairs_owned: List[int] = field(default_factory=list)
    cursor_final: int = 0
    compute_seconds: float = 0.0
    compaction_seconds: float = 0.0

    @property
    def total_pairs_owned(self) -> int:
        return sum(self.pairs_owned)

    @property
    def imbalance(self) -> float:
        """Largest worker share of owned pairs over the even share (1.0 = perfectly balanced)."""
        total = self.total_pairs_owned
        if not total:
            return 1.0
        return max(self.pairs_owned) * len(self.pairs_owned) / total


@contextmanager
def _task_pool(manager: Optional[BackgroundTaskManager], n_workers: int, executor: str
               ) -> Iterator[BackgroundTaskManager]:
    if manager is not None:
        yield manager
        return
    with BackgroundTaskManager(n_workers, executor) as own:
        yield own


def map_partitions(manager: BackgroundTaskManager, plan: PartitionPlan,
                   task: Callable[..., Any], *args: Any) -> List[Tuple[int, Any]]:
    """Runs `task(*args, start, end)` for every non-empty range; returns (worker, result) in worker order."""
    busy = plan.busy()
    results = manager.run_tasks([(task, (*args, start, end)) for _, (start, end) in busy])
    return [(w, result) for (w, _), result in zip(busy, results)]


# --- Engine entry points ---

def run_parallel_similarities(model: SystemModel, deps: DependencyTable, n_workers: int,
                              executor: str = "process", checked: bool = False,
                              manager: Optional[BackgroundTaskManager] = None,
                              ) -> Tuple[Tuple[SimilarityEntry, ...], ParallelRunStats]:
    plan = plan_partition(model.n_methods, n_workers)
    stats = ParallelRunStats(n_workers=n_workers, executor=executor)
    index = PropertyIndex.build(model, deps)

    started = time.perf_counter()
    with _task_pool(manager, n_workers, executor) as pool:
        busy = plan.busy()
        computed = pool.run_tasks([(similarity_range_task, (index, start, end, w)) for w, (start, end) in busy])
    by_owner = {buffer.owner: buffer for buffer in computed}
    buffers = [by_owner.get(w, LocalBuffer(owner=w)) for w in range(n_workers)]
    stats.compute_seconds = time.perf_counter() - started

    started = time.perf_counter()
    output = compact(buffers, checked=checked)
    entries = output.sorted_entries()
    stats.compaction_seconds = time.perf_counter() - started

    stats.buffer_lengths = [len(b) for b in buffers]
    stats.pairs_owned = [b.pairs_owned for b in buffers]
    stats.cursor_final = output.cursor.value
    logger.debug(f"ParallelEngine: {len(entries)} similarities from {n_workers} workers "
                 f"(buffers {stats.buffer_lengths}, compute {stats.compute_seconds:.3f}s, "
                 f"compaction {stats.compaction_seconds:.3f}s)")
    return entries, stats


def parallel_similarities(model: SystemModel, deps: DependencyTable, n_workers: int,
                          executor: str = "process", checked: bool = False) -> Tuple[SimilarityEntry, ...]:
    entries, _ = run_parallel_similarities(model, deps, n_workers, executor, checked)
    return entries


def parallel_class_report(model: SystemModel, deps: DependencyTable, n_workers: int,
                          executor: str = "process", manager: Optional[BackgroundTaskManager] = None,
                          ) -> Tuple[Dict[int, float], Dict[int, int], Dict[int, int], FrozenSet[int]]:
    """LCOM (both variants), CBO and degeneracy, partitioned over class ids into dense arrays."""
    c = model.n_classes
    plan = plan_partition(c, n_workers)
    lcom = np.zeros(c, dtype=np.float64)
    lcom_ck_values = np.zeros(c, dtype=np.int64)
    cbo_values = np.zeros(c, dtype=np.int64)
    degenerate = np.zeros(c, dtype=bool)
    with _task_pool(manager, n_workers, executor) as pool:
        results: List[Tuple[int, ClassRangeResult]] = map_partitions(pool, plan, class_range_task, model, deps)
    for _, part in results:
        end = part.start + len(part.lcom)
        lcom[part.start:end] = part.lcom
        lcom_ck_values[part.start:end] = part.lcom_ck
        cbo_values[part.start:end] = part.cbo
        degenerate[part.start:end] = part.degenerate
    return (
        dict(enumerate(lcom.tolist())),
        dict(enumerate(lcom_ck_values.tolist())),
        dict(enumerate(cbo_values.tolist())),
        frozenset(np.flatnonzero(degenerate).tolist()),
    )


def parallel_class_metrics(model: SystemModel, deps: DependencyTable, n_workers: int,
                           executor: str = "process") -> Tuple[Dict[int, float], Dict[int, int]]:
    lcom, _, cbo_values, _ = parallel_class_report(model, deps, n_workers, executor)
    return lcom, cbo_values


def call_matrix(model: SystemModel, deps: DependencyTable) -> csr_matrix:
    """Caller x callee matrix with a 1 for every call edge."""
    m = model.n_methods
    callers = np.fromiter((mid for mid in range(m) for _ in deps.calls_of(mid)), dtype=np.int64)
    callees = np.fromiter((t for mid in range(m) for t in sorted(deps.calls_of(mid))), dtype=np.int64)
    data = np.ones(callers.size, dtype=np.int64)
    return coo_matrix((data, (callers, callees)), shape=(m, m), dtype=np.int64).tocsr()


def parallel_fan_metrics(model: SystemModel, deps: DependencyTable, n_workers: int,
                         executor: str = "process", manager: Optional[BackgroundTaskManager] = None,
                         ) -> Tuple[Dict[int, int], Dict[int, int]]:
    m = model.n_methods
    plan = plan_partition(m, n_workers)
    calls = call_matrix(model, deps)
    fan_in = np.zeros(m, dtype=np.int64)
    fan_out = np.zeros(m, dtype=np.int64)
    with _task_pool(manager, n_workers, executor) as pool:
        results = map_partitions(pool, plan, fan_range_task, calls)
    for _, (start, part_in, part_out) in results:
        fan_in[start:start + part_in.size] = part_in
        fan_out[start:start + part_out.size] = part_out
    return dict(enumerate(fan_in.tolist())), dict(enumerate(fan_out.tolist()))


def parallel_full_report(model: SystemModel, deps: DependencyTable, n_workers: int,
                         executor: str = "process", checked: bool = False,
                         manager: Optional[BackgroundTaskManager] = None,
                         ) -> Tuple[MetricsReport, ParallelRunStats]:
    """Every metric through the parallel path, sharing one worker pool across phases."""
    logger.debug(f"ParallelEngine: Report for m={model.n_methods} c={model.n_classes} "
                 f"with {n_workers} {executor} workers")
    with _task_pool(manager, n_workers, executor) as pool:
        fan_in, fan_out = parallel_fan_metrics(model, deps, n_workers, executor, manager=pool)
        similarity, stats = run_parallel_similarities(model, deps, n_workers, executor, checked, manager=pool)
        lcom, lcom_ck_values, cbo_values, degenerate = parallel_class_report(
            model, deps, n_workers, executor, manager=pool)
    report = MetricsReport(
        fan_in=fan_in,
        fan_out=fan_out,
        similarity=similarity,
        lcom=lcom,
        lcom_ck=lcom_ck_values,
        cbo=cbo_values,
        degenerate=degenerate,
        workload=estimate_workload(model, deps),
    )
    return report, stats
