# mm/core/metrics_engine.py
"""Sequential reference implementations of every metric and the workload estimator.

This is the ground truth the parallel engine must reproduce exactly. All
per-class metrics accept an optional `members` override that replaces the
class's method set (what-if moves); attribute ownership and the owner of every
dependency target always come from the input model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Dict, FrozenSet, List, NamedTuple, Optional, Tuple

from loguru import logger

from .errors import ContractViolation
from .facts_model import DependencyTable, PropertySet, SystemModel, properties_of


class SimilarityEntry(NamedTuple):
    """(i, j, value) with i < j and value in (0, 1]."""
    i: int
    j: int
    value: float


@dataclass(frozen=True)
class WorkloadEstimate:
    m: int
    c: int
    k_m: int
    k_a: int
    n_fan: int
    n_sim: int
    n_lcom: int
    n_cbo: int
    n_total: int
    n_attributes: int = 0
    fan_in_comparisons: int = 0  # worst case per method: k_m * (m - 1)
    pair_comparisons: int = 0  # worst case per method pair: (k_m + k_a) ** 2

    @classmethod
    def from_counts(cls, m: int, c: int, k_m: int = 0, k_a: int = 0, n_attributes: int = 0) -> "WorkloadEstimate":
        n_fan = 2 * m
        n_sim = m * (m - 1) // 2
        n_lcom = c * (m + 1)
        n_cbo = c * (m + 1)
        return cls(
            m=m, c=c, k_m=k_m, k_a=k_a,
            n_fan=n_fan, n_sim=n_sim, n_lcom=n_lcom, n_cbo=n_cbo,
            n_total=n_fan + n_sim + n_lcom + n_cbo,
            n_attributes=n_attributes,
            fan_in_comparisons=k_m * max(m - 1, 0),
            pair_comparisons=(k_m + k_a) ** 2,
        )

    @property
    def n_total_millions(self) -> float:
        return round(self.n_total / 1_000_000, 1)


@dataclass(frozen=True)
class MetricsReport:
    fan_in: Dict[int, int] = field(default_factory=dict)
    fan_out: Dict[int, int] = field(default_factory=dict)
    similarity: Tuple[SimilarityEntry, ...] = ()
    lcom: Dict[int, float] = field(default_factory=dict)
    lcom_ck: Dict[int, int] = field(default_factory=dict)
    cbo: Dict[int, int] = field(default_factory=dict)
    degenerate: FrozenSet[int] = frozenset()
    workload: Optional[WorkloadEstimate] = None

    @property
    def n_methods(self) -> int:
        return len(self.fan_out)


# --- Method-level metrics ---

def fan_in(model: SystemModel, deps: DependencyTable) -> Dict[int, int]:
    counts = {mid: 0 for mid in sorted(model.method_owner)}
    for caller in sorted(model.method_owner):
        for callee in deps.calls_of(caller):
            if callee != caller:
                counts[callee] += 1
    return counts


def fan_out(model: SystemModel, deps: DependencyTable) -> Dict[int, int]:
    return {mid: len(deps.calls_of(mid)) for mid in sorted(model.method_owner)}


def jaccard_of_sets(p: AbstractSet, q: AbstractSet) -> float:
    union = len(p | q)
    if union == 0:
        return 0.0
    return len(p & q) / union


def jaccard(p: int, q: int, deps: DependencyTable) -> float:
    if p == q:
        raise ContractViolation(f"jaccard needs two distinct methods, got {p} twice")
    return jaccard_of_sets(properties_of(p, deps), properties_of(q, deps))


def all_similarities(model: SystemModel, deps: DependencyTable) -> Tuple[SimilarityEntry, ...]:
    """Every pair i < j with non-zero similarity, sorted by (i, j).

    Pairs sharing no property have similarity 0 and are never stored, so only
    pairs meeting in the property -> methods index are evaluated.
    """
    method_ids = sorted(model.method_owner)
    props: Dict[int, PropertySet] = {mid: properties_of(mid, deps) if mid in deps else frozenset()
                                     for mid in method_ids}
    holders: Dict[tuple, List[int]] = {}
    for mid in method_ids:
        for prop in props[mid]:
            holders.setdefault(prop, []).append(mid)

    entries: List[SimilarityEntry] = []
    for i in method_ids:
        partners = set()
        for prop in props[i]:
            partners.update(j for j in holders[prop] if j > i)
        for j in sorted(partners):
            entries.append(SimilarityEntry(i, j, jaccard_of_sets(props[i], props[j])))
    return tuple(entries)


# --- Class-level metrics ---

def _members(class_id: int, model: SystemModel, members: Optional[AbstractSet[int]]) -> List[int]:
    record = model.class_record(class_id)
    return sorted(record.method_ids if members is None else members)


def own_accesses(method_id: int, attributes: AbstractSet[int], deps: DependencyTable) -> FrozenSet[int]:
    return deps.accesses_of(method_id) & attributes


def is_degenerate(class_id: int, model: SystemModel, members: Optional[AbstractSet[int]] = None) -> bool:
    """LCOM is undefined (reported as 0) with no attributes or no methods."""
    return not model.class_record(class_id).attribute_ids or not _members(class_id, model, members)


def lcom_normalized(class_id: int, model: SystemModel, deps: DependencyTable,
                    members: Optional[AbstractSet[int]] = None) -> float:
    """1 minus the mean, over methods, of the fraction of the class's own attributes each uses."""
    attributes = model.class_record(class_id).attribute_ids
    methods = _members(class_id, model, members)
    if not attributes or not methods:
        return 0.0
    n_attributes = len(attributes)
    total = 0.0
    for mid in methods:
        total += len(own_accesses(mid, attributes, deps)) / n_attributes
    return 1.0 - total / len(methods)


def lcom_ck(class_id: int, model: SystemModel, deps: DependencyTable,
            members: Optional[AbstractSet[int]] = None) -> int:
    """Pairs sharing no own attribute minus pairs sharing one, clamped at zero."""
    attributes = model.class_record(class_id).attribute_ids
    methods = _members(class_id, model, members)
    if len(methods) < 2:
        return 0
    used = [own_accesses(mid, attributes, deps) for mid in methods]
    disjoint = sharing = 0
    for a in range(len(used)):
        for b in range(a + 1, len(used)):
            if used[a] & used[b]:
                sharing += 1
            else:
                disjoint += 1
    return max(0, disjoint - sharing)


def classes_used_by(method_id: int, model: SystemModel, deps: DependencyTable) -> FrozenSet[int]:
    """Owners of everything a method calls or accesses (may include its own class)."""
    return frozenset(
        [model.owner_of_method(t) for t in deps.calls_of(method_id)]
        + [model.owner_of_attribute(a) for a in deps.accesses_of(method_id)]
    )


def cbo(class_id: int, model: SystemModel, deps: DependencyTable,
        members: Optional[AbstractSet[int]] = None) -> int:
    """Distinct other classes whose methods the class calls or whose attributes it accesses."""
    used = set()
    for mid in _members(class_id, model, members):
        used |= classes_used_by(mid, model, deps)
    used.discard(class_id)
    return len(used)


# --- Whole-system ---

def estimate_workload(model: SystemModel, deps: DependencyTable) -> WorkloadEstimate:
    return WorkloadEstimate.from_counts(
        m=model.n_methods, c=model.n_classes,
        k_m=deps.max_calls, k_a=deps.max_accesses,
        n_attributes=model.n_attributes,
    )


def class_metrics(model: SystemModel, deps: DependencyTable
                  ) -> Tuple[Dict[int, float], Dict[int, int], Dict[int, int], FrozenSet[int]]:
    class_ids = [record.id for record in model.classes]
    return (
        {cid: lcom_normalized(cid, model, deps) for cid in class_ids},
        {cid: lcom_ck(cid, model, deps) for cid in class_ids},
        {cid: cbo(cid, model, deps) for cid in class_ids},
        frozenset(cid for cid in class_ids if is_degenerate(cid, model)),
    )


def full_report(model: SystemModel, deps: DependencyTable) -> MetricsReport:
    """All metrics through the sequential reference path."""
    logger.debug(f"MetricsEngine: Sequential report for m={model.n_methods} c={model.n_classes}")
    lcom, lcom_ck_values, cbo_values, degenerate = class_metrics(model, deps)
    return MetricsReport(
        fan_in=fan_in(model, deps),
        fan_out=fan_out(model, deps),
        similarity=all_similarities(model, deps),
        lcom=lcom,
        lcom_ck=lcom_ck_values,
        cbo=cbo_values,
        degenerate=degenerate,
        workload=estimate_workload(model, deps),
    )
