# mm/core/proponent.py
"""Move-method suggestions driven by similarity, cohesion and coupling.

Every candidate is checked with a what-if move: the moved method leaves the
origin's method set and joins the destination's, everything else (attribute
ownership, owners of call targets) stays as in the input model. Suggestions
are always computed against the original model; nothing cascades.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from loguru import logger

from .errors import ContractViolation, OwnershipError
from .facts_model import DependencyTable, SystemModel
from .metrics_engine import MetricsReport, cbo, classes_used_by, is_degenerate, lcom_normalized
from .parallel_engine import map_partitions, plan_partition
from .task_manager import BackgroundTaskManager


class Criterion(str, Enum):
    SIMILARITY = "similarity"
    COHESION = "cohesion"
    COUPLING = "coupling"


CRITERIA_ORDER: Tuple[Criterion, ...] = (Criterion.SIMILARITY, Criterion.COHESION, Criterion.COUPLING)
THRESHOLD_MODES = ("mean", "mean_with_zeros", "explicit")


# --- Thresholds ---

@dataclass(frozen=True)
class Thresholds:
    similarity_threshold: float = 0.0
    lcom_threshold: float = 0.0
    cbo_threshold: float = 0.0
    mode: str = "mean"

    def __post_init__(self):
        if self.mode not in THRESHOLD_MODES:
            raise ContractViolation(f"Unknown threshold mode '{self.mode}'")
        for name in ("similarity_threshold", "lcom_threshold", "cbo_threshold"):
            if getattr(self, name) < 0:
                raise ContractViolation(f"{name} must be non-negative, got {getattr(self, name)}")


def _mean(values: Iterable[float]) -> float:
    array = np.fromiter(values, dtype=np.float64)
    return float(array.mean()) if array.size else 0.0


def compute_thresholds(report: MetricsReport, mode: str = "mean",
                       similarity: Optional[float] = None,
                       lcom: Optional[float] = None,
                       cbo: Optional[float] = None) -> Thresholds:
    """Thresholds from the report; an explicit value for any threshold wins in every mode.

    `mean` averages the stored (nonzero) similarities, `mean_with_zeros` spreads
    their sum over all m(m-1)/2 pairs, `explicit` uses the given values (0 when
    omitted). LCOM and CBO thresholds are class means in both mean modes.
    """
    if mode not in THRESHOLD_MODES:
        raise ContractViolation(f"Unknown threshold mode '{mode}'")
    if mode == "explicit":
        computed = (0.0, 0.0, 0.0)
    else:
        if mode == "mean":
            sim = _mean(entry.value for entry in report.similarity)
        else:
            m = report.n_methods
            n_pairs = m * (m - 1) // 2
            sim = float(np.fromiter((e.value for e in report.similarity), dtype=np.float64).sum()) / n_pairs \
                if n_pairs else 0.0
        computed = (sim, _mean(report.lcom.values()), _mean(report.cbo.values()))
    return Thresholds(
        similarity_threshold=computed[0] if similarity is None else similarity,
        lcom_threshold=computed[1] if lcom is None else lcom,
        cbo_threshold=computed[2] if cbo is None else cbo,
        mode=mode,
    )


# --- What-if evaluation ---

@dataclass(frozen=True)
class WhatIfResult:
    method: int
    origin: int
    destination: int
    lcom_origin_before: float
    lcom_origin_after: float
    lcom_dest_before: float
    lcom_dest_after: float
    cbo_origin_before: int
    cbo_origin_after: int
    cbo_dest_before: int
    cbo_dest_after: int
    origin_degenerate_after: bool = False
    dest_degenerate_after: bool = False

    @property
    def improves_cohesion(self) -> bool:
        return self.lcom_origin_after < self.lcom_origin_before and self.lcom_dest_after < self.lcom_dest_before

    @property
    def improves_coupling(self) -> bool:
        return self.cbo_origin_after < self.cbo_origin_before and self.cbo_dest_after <= self.cbo_dest_before


def _what_if(method: int, origin: int, destination: int, model: SystemModel, deps: DependencyTable,
             report: Optional[MetricsReport] = None) -> WhatIfResult:
    if destination == origin:
        raise OwnershipError(f"Destination of method {method} equals its origin {origin}")
    if model.owner_of_method(method) != origin:
        raise OwnershipError(f"Method {method} is owned by {model.owner_of_method(method)}, not {origin}")
    origin_members = model.class_record(origin).method_ids - {method}
    dest_members = model.class_record(destination).method_ids | {method}
    if report is not None:
        lcom_o, lcom_d = report.lcom[origin], report.lcom[destination]
        cbo_o, cbo_d = report.cbo[origin], report.cbo[destination]
    else:
        lcom_o, lcom_d = lcom_normalized(origin, model, deps), lcom_normalized(destination, model, deps)
        cbo_o, cbo_d = cbo(origin, model, deps), cbo(destination, model, deps)
    return WhatIfResult(
        method=method, origin=origin, destination=destination,
        lcom_origin_before=lcom_o,
        lcom_origin_after=lcom_normalized(origin, model, deps, origin_members),
        lcom_dest_before=lcom_d,
        lcom_dest_after=lcom_normalized(destination, model, deps, dest_members),
        cbo_origin_before=cbo_o,
        cbo_origin_after=cbo(origin, model, deps, origin_members),
        cbo_dest_before=cbo_d,
        cbo_dest_after=cbo(destination, model, deps, dest_members),
        origin_degenerate_after=is_degenerate(origin, model, origin_members),
        dest_degenerate_after=is_degenerate(destination, model, dest_members),
    )


def what_if_move(method: int, origin: int, destination: int,
                 model: SystemModel, deps: DependencyTable) -> WhatIfResult:
    """LCOM and CBO of origin and destination before and after moving `method`; the model is not touched."""
    return _what_if(method, origin, destination, model, deps)


# --- Suggestions ---

@dataclass(frozen=True)
class MoveSuggestion:
    method: int
    origin: int
    destination: int
    criteria: Tuple[str, ...]
    lcom_origin_before: float
    lcom_origin_after: float
    lcom_dest_before: float
    lcom_dest_after: float
    cbo_origin_before: int
    cbo_origin_after: int
    cbo_dest_before: int
    cbo_dest_after: int
    alternatives: Tuple[int, ...] = ()

    @classmethod
    def from_what_if(cls, result: WhatIfResult, criterion: Criterion,
                     alternatives: Tuple[int, ...] = ()) -> "MoveSuggestion":
        return cls(
            method=result.method, origin=result.origin, destination=result.destination,
            criteria=(criterion.value,),
            lcom_origin_before=result.lcom_origin_before, lcom_origin_after=result.lcom_origin_after,
            lcom_dest_before=result.lcom_dest_before, lcom_dest_after=result.lcom_dest_after,
            cbo_origin_before=result.cbo_origin_before, cbo_origin_after=result.cbo_origin_after,
            cbo_dest_before=result.cbo_dest_before, cbo_dest_after=result.cbo_dest_after,
            alternatives=alternatives,
        )

    @property
    def move(self) -> Tuple[int, int]:
        return self.method, self.destination

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return self.origin, self.method, self.destination

    @property
    def lowers_origin_cbo(self) -> bool:
        return self.cbo_origin_after < self.cbo_origin_before


def _cohesion_rank(result: WhatIfResult) -> Tuple[float, int]:
    return result.lcom_origin_after + result.lcom_dest_after, result.destination


def _coupling_rank(result: WhatIfResult) -> Tuple[int, int]:
    return result.cbo_dest_after, result.destination


def _best_move(method: int, origin: int, destinations: Iterable[int], criterion: Criterion,
               model: SystemModel, deps: DependencyTable, report: MetricsReport,
               verbose: bool) -> Optional[MoveSuggestion]:
    """Evaluates every destination and keeps the best one passing the criterion's predicate."""
    passing: List[WhatIfResult] = []
    for destination in sorted(set(destinations) - {origin}):
        result = _what_if(method, origin, destination, model, deps, report)
        accepted = result.improves_coupling if criterion is Criterion.COUPLING else result.improves_cohesion
        if accepted:
            passing.append(result)
    if not passing:
        return None
    passing.sort(key=_coupling_rank if criterion is Criterion.COUPLING else _cohesion_rank)
    alternatives = tuple(r.destination for r in passing[1:]) if verbose else ()
    return MoveSuggestion.from_what_if(passing[0], criterion, alternatives)


def suggest_by_similarity(model: SystemModel, deps: DependencyTable, report: MetricsReport,
                          thresholds: Thresholds, verbose: bool = False) -> List[MoveSuggestion]:
    """Methods of pairs above the similarity threshold on different classes, moved toward the partner's
    class or any class owning a method they call, when both LCOMs drop."""
    destinations: Dict[int, Set[int]] = {}
    for entry in report.similarity:
        if entry.value <= thresholds.similarity_threshold:
            continue
        owner_i, owner_j = model.owner_of_method(entry.i), model.owner_of_method(entry.j)
        if owner_i == owner_j:
            continue
        destinations.setdefault(entry.i, set()).add(owner_j)
        destinations.setdefault(entry.j, set()).add(owner_i)

    suggestions: List[MoveSuggestion] = []
    for method in sorted(destinations):
        origin = model.owner_of_method(method)
        candidates = destinations[method] | {model.owner_of_method(t) for t in deps.calls_of(method)}
        best = _best_move(method, origin, candidates, Criterion.SIMILARITY, model, deps, report, verbose)
        if best is not None:
            suggestions.append(best)
    logger.debug(f"Proponent: similarity criterion examined {len(destinations)} methods, "
                 f"emitted {len(suggestions)} moves")
    return sorted(suggestions, key=lambda s: s.sort_key)


def _cohesion_candidates(method: int, model: SystemModel, deps: DependencyTable) -> Set[int]:
    return ({model.owner_of_method(t) for t in deps.calls_of(method)}
            | {model.owner_of_attribute(a) for a in deps.accesses_of(method)})


def _class_moves(class_id: int, criterion: Criterion, model: SystemModel, deps: DependencyTable,
                 report: MetricsReport, verbose: bool, max_moves_per_class: int) -> List[MoveSuggestion]:
    methods = model.class_record(class_id).method_ids
    if criterion is Criterion.COHESION:
        ordered = sorted(methods, key=lambda mid: (-report.fan_out[mid], mid))
    else:
        ordered = sorted(methods, key=lambda mid: (-(report.fan_in[mid] + report.fan_out[mid]), mid))
    moves: List[MoveSuggestion] = []
    for method in ordered:
        if criterion is Criterion.COHESION:
            candidates = _cohesion_candidates(method, model, deps)
        else:
            candidates = classes_used_by(method, model, deps)
        best = _best_move(method, class_id, candidates, criterion, model, deps, report, verbose)
        if best is not None:
            moves.append(best)
            if max_moves_per_class and len(moves) >= max_moves_per_class:
                break
    return moves


def class_range_moves_task(criterion: Criterion, model: SystemModel, deps: DependencyTable,
                           report: MetricsReport, source_classes: Tuple[int, ...], verbose: bool,
                           max_moves_per_class: int, start: int, end: int) -> List[MoveSuggestion]:
    """Worker kernel: moves for the source classes at positions [start, end)."""
    moves: List[MoveSuggestion] = []
    for class_id in source_classes[start:end]:
        moves.extend(_class_moves(class_id, criterion, model, deps, report, verbose, max_moves_per_class))
    return moves


def _suggest_from_classes(criterion: Criterion, source_classes: Sequence[int], model: SystemModel,
                          deps: DependencyTable, report: MetricsReport, verbose: bool,
                          max_moves_per_class: int, n_workers: int, executor: str,
                          manager: Optional[BackgroundTaskManager]) -> List[MoveSuggestion]:
    sources = tuple(source_classes)
    if n_workers <= 1 and manager is None:
        moves = class_range_moves_task(criterion, model, deps, report, sources, verbose,
                                       max_moves_per_class, 0, len(sources))
    else:
        # Workers never read similarities; leave them out of what gets shipped.
        slim = dataclasses.replace(report, similarity=())
        plan = plan_partition(len(sources), n_workers)
        args = (criterion, model, deps, slim, sources, verbose, max_moves_per_class)
        if manager is not None:
            parts = map_partitions(manager, plan, class_range_moves_task, *args)
        else:
            with BackgroundTaskManager(n_workers, executor) as pool:
                parts = map_partitions(pool, plan, class_range_moves_task, *args)
        moves = [move for _, part in parts for move in part]
    logger.debug(f"Proponent: {criterion.value} criterion examined {len(sources)} classes, "
                 f"emitted {len(moves)} moves")
    return sorted(moves, key=lambda s: s.sort_key)


def suggest_by_cohesion(model: SystemModel, deps: DependencyTable, report: MetricsReport,
                        thresholds: Thresholds, verbose: bool = False, max_moves_per_class: int = 0,
                        n_workers: int = 1, executor: str = "process",
                        manager: Optional[BackgroundTaskManager] = None) -> List[MoveSuggestion]:
    """Classes above the LCOM threshold shed methods, highest fan-out first, toward classes they use."""
    sources = [cid for cid in sorted(report.lcom) if report.lcom[cid] > thresholds.lcom_threshold]
    return _suggest_from_classes(Criterion.COHESION, sources, model, deps, report, verbose,
                                 max_moves_per_class, n_workers, executor, manager)


def suggest_by_coupling(model: SystemModel, deps: DependencyTable, report: MetricsReport,
                        thresholds: Thresholds, verbose: bool = False, max_moves_per_class: int = 0,
                        n_workers: int = 1, executor: str = "process",
                        manager: Optional[BackgroundTaskManager] = None) -> List[MoveSuggestion]:
    """Classes above the CBO threshold shed methods, highest fan-in + fan-out first."""
    sources = [cid for cid in sorted(report.cbo) if report.cbo[cid] > thresholds.cbo_threshold]
    return _suggest_from_classes(Criterion.COUPLING, sources, model, deps, report, verbose,
                                 max_moves_per_class, n_workers, executor, manager)


def parse_criteria(criteria: Iterable[str]) -> Tuple[Criterion, ...]:
    selected = set()
    for name in criteria:
        try:
            selected.add(Criterion(name))
        except ValueError:
            raise ContractViolation(f"Unknown criterion '{name}'") from None
    if not selected:
        raise ContractViolation("At least one criterion must be selected")
    return tuple(c for c in CRITERIA_ORDER if c in selected)


def suggest_all(model: SystemModel, deps: DependencyTable, report: MetricsReport, thresholds: Thresholds,
                criteria: Iterable[str] = tuple(c.value for c in CRITERIA_ORDER), combine: str = "union",
                verbose: bool = False, max_moves_per_class: int = 0,
                n_workers: int = 1, executor: str = "process") -> List[MoveSuggestion]:
    """Runs the selected criteria and merges them per (method, destination).

    `union` keeps every move and joins the criterion tags of duplicates;
    `intersection` keeps only moves every selected criterion emitted.
    """
    if combine not in ("union", "intersection"):
        raise ContractViolation(f"Unknown combine mode '{combine}'")
    selected = parse_criteria(criteria)
    runners: Dict[Criterion, Callable[[], List[MoveSuggestion]]] = {
        Criterion.SIMILARITY: lambda: suggest_by_similarity(model, deps, report, thresholds, verbose),
        Criterion.COHESION: lambda: suggest_by_cohesion(model, deps, report, thresholds, verbose,
                                                        max_moves_per_class, n_workers, executor),
        Criterion.COUPLING: lambda: suggest_by_coupling(model, deps, report, thresholds, verbose,
                                                        max_moves_per_class, n_workers, executor),
    }

    merged: Dict[Tuple[int, int], MoveSuggestion] = {}
    emitted_by: Dict[Tuple[int, int], Set[Criterion]] = {}
    for criterion in selected:
        for suggestion in runners[criterion]():
            emitted_by.setdefault(suggestion.move, set()).add(criterion)
            previous = merged.get(suggestion.move)
            if previous is None:
                merged[suggestion.move] = suggestion
            else:
                merged[suggestion.move] = dataclasses.replace(
                    previous, criteria=previous.criteria + suggestion.criteria)

    if combine == "intersection":
        keep = {move for move, tags in emitted_by.items() if len(tags) == len(selected)}
        merged = {move: s for move, s in merged.items() if move in keep}
    result = sorted(merged.values(), key=lambda s: s.sort_key)
    logger.info(f"Proponent: {len(result)} suggestions ({combine} of {', '.join(c.value for c in selected)})")
    return result
