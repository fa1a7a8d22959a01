# mm/core/background_tasks.py
"""Worker-side data and kernels for the parallel engine.

Everything here is a top-level function or a plain dataclass so it can be
shipped to a process pool. A worker only ever touches its own id range and
its own LocalBuffer; shared inputs are read-only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from loguru import logger
from scipy.sparse import coo_matrix, csr_matrix

from .facts_model import DependencyTable, SystemModel
from .metrics_engine import cbo, is_degenerate, lcom_ck, lcom_normalized

# Rows multiplied per sparse product; bounds the size of each partial result.
ROW_BLOCK = 2048


@dataclass
class LocalBuffer:
    """Nonzero similarity triples produced by one worker, kept as column chunks."""
    owner: int
    pairs_owned: int = 0
    _i: List[np.ndarray] = field(default_factory=list, repr=False)
    _j: List[np.ndarray] = field(default_factory=list, repr=False)
    _values: List[np.ndarray] = field(default_factory=list, repr=False)

    def append(self, i: np.ndarray, j: np.ndarray, values: np.ndarray) -> None:
        self._i.append(i)
        self._j.append(j)
        self._values.append(values)

    def __len__(self) -> int:
        return sum(chunk.size for chunk in self._i)

    def columns(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self._i:
            return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
        return np.concatenate(self._i), np.concatenate(self._j), np.concatenate(self._values)


@dataclass(frozen=True)
class PropertyIndex:
    """Method x property incidence matrix with the property count of every method.

    Property codes: a called method t maps to column t, an accessed attribute a
    maps to column n_methods + a, which keeps the two tags disjoint.
    """
    n_methods: int
    incidence: csr_matrix
    degree: np.ndarray

    @classmethod
    def build(cls, model: SystemModel, deps: DependencyTable) -> "PropertyIndex":
        m = model.n_methods
        rows: List[int] = []
        codes: List[int] = []
        for mid in range(m):
            row = sorted(deps.calls_of(mid)) + [m + a for a in sorted(deps.accesses_of(mid))]
            rows.extend([mid] * len(row))
            codes.extend(row)
        data = np.ones(len(codes), dtype=np.int64)
        coords = (np.asarray(rows, dtype=np.int64), np.asarray(codes, dtype=np.int64))
        incidence = coo_matrix((data, coords), shape=(m, m + model.n_attributes), dtype=np.int64).tocsr()
        degree = np.diff(incidence.indptr).astype(np.int64)
        return cls(m, incidence, degree)


def pairs_in_rows(n_methods: int, start: int, end: int) -> int:
    """Number of upper-triangle pairs (i, j), j > i, owned by rows [start, end)."""
    if end <= start:
        return 0
    count = end - start
    first, last = n_methods - 1 - start, n_methods - end
    return count * (first + last) // 2


def similarity_range_task(index: PropertyIndex, start: int, end: int, owner: int) -> LocalBuffer:
    """Jaccard of every pair (i, j) with i in [start, end) and j > i; only nonzero results are kept.

    Intersection sizes are the entries of A[rows] @ A.T, so pairs without a
    common property never materialise. The union is |P| + |Q| - |P & Q|.
    """
    buffer = LocalBuffer(owner=owner, pairs_owned=pairs_in_rows(index.n_methods, start, end))
    transposed = index.incidence.T.tocsc()
    for block_start in range(start, end, ROW_BLOCK):
        block_end = min(end, block_start + ROW_BLOCK)
        shared = (index.incidence[block_start:block_end] @ transposed).tocoo()
        i = shared.row.astype(np.int64) + block_start
        j = shared.col.astype(np.int64)
        upper = (j > i) & (shared.data > 0)
        if not upper.any():
            continue
        i, j, intersection = i[upper], j[upper], shared.data[upper].astype(np.int64)
        union = index.degree[i] + index.degree[j] - intersection
        buffer.append(i, j, intersection / union)
    logger.debug(f"Worker {owner}: rows [{start}, {end}) -> {len(buffer)} nonzero pairs")
    return buffer


def fan_range_task(calls: csr_matrix, start: int, end: int) -> Tuple[int, np.ndarray, np.ndarray]:
    """Fan-out of methods [start, end) from row sizes, fan-in from the stored entries of their columns."""
    fan_out = np.diff(calls.indptr)[start:end]
    fan_in = calls[:, start:end].getnnz(axis=0)
    return start, np.asarray(fan_in, dtype=np.int64), np.asarray(fan_out, dtype=np.int64)


@dataclass(frozen=True)
class ClassRangeResult:
    start: int
    lcom: Tuple[float, ...]
    lcom_ck: Tuple[int, ...]
    cbo: Tuple[int, ...]
    degenerate: Tuple[bool, ...]


def class_range_task(model: SystemModel, deps: DependencyTable, start: int, end: int) -> ClassRangeResult:
    class_ids = range(start, end)
    return ClassRangeResult(
        start=start,
        lcom=tuple(lcom_normalized(cid, model, deps) for cid in class_ids),
        lcom_ck=tuple(lcom_ck(cid, model, deps) for cid in class_ids),
        cbo=tuple(cbo(cid, model, deps) for cid in class_ids),
        degenerate=tuple(is_degenerate(cid, model) for cid in class_ids),
    )
