# mm/core/ingest.py
"""Facts file reading/writing and the synthetic system generator.

This is the boundary where an external extractor (bytecode filter, source
parser, ...) hands over its findings: a JSON document listing classes, their
attributes and methods, and per method the ids it calls and accesses.
Overload resolution is the producer's job; ids arrive already unique.
"""
import bisect
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Set, Tuple

from loguru import logger

from .constants import FACTS_SCHEMA_VERSION, SUPPORTED_SCHEMA_VERSIONS
from .errors import ContractViolation, FactsIOError, FactsParseError, FactsValidationError
from .facts_model import (
    ClassRecord, DependencyTable, SystemModel, Violation, ViolationKind, validate,
)
from .splitmix import SplitMix64


@dataclass(frozen=True)
class GeneratorConfig:
    n_classes: int
    n_methods: int
    n_attributes: int
    max_calls_per_method: int = 0  # k_m
    max_accesses_per_method: int = 0  # k_a
    intra_class_bias: float = 0.5
    seed: int = 0
    allow_empty_classes: bool = False

    def check(self) -> None:
        if self.n_classes <= 0 or self.n_methods <= 0 or self.n_attributes < 0:
            raise ContractViolation("n_classes and n_methods must be positive, n_attributes non-negative")
        if self.max_calls_per_method < 0 or self.max_accesses_per_method < 0:
            raise ContractViolation("k_m and k_a must be non-negative")
        if not (0.0 <= self.intra_class_bias <= 1.0):
            raise ContractViolation("intra_class_bias must be within [0, 1]")
        if self.n_methods < self.n_classes and not self.allow_empty_classes:
            raise ContractViolation(
                f"n_methods ({self.n_methods}) < n_classes ({self.n_classes}) leaves classes empty; "
                "set allow_empty_classes to permit it")


# --- Reading ---

def _expect(condition: bool, message: str, path: Path) -> None:
    if not condition:
        raise FactsParseError(message, path)


def _is_id(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def _parse_document(text: str, path: Path) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise FactsParseError(e.msg, path, e.lineno, e.colno) from e
    _expect(isinstance(document, dict), "top level must be a JSON object", path)
    _expect("schema_version" in document, "missing 'schema_version'", path)
    _expect(isinstance(document.get("classes"), list), "'classes' must be a list", path)
    for index, cls in enumerate(document["classes"]):
        where = f"classes[{index}]"
        _expect(isinstance(cls, dict), f"{where} must be an object", path)
        _expect(_is_id(cls.get("id")), f"{where}.id must be a non-negative integer", path)
        _expect(isinstance(cls.get("name", ""), str), f"{where}.name must be a string", path)
        for key in ("attributes", "methods"):
            _expect(isinstance(cls.get(key, []), list), f"{where}.{key} must be a list", path)
        for a_index, attr in enumerate(cls.get("attributes", [])):
            _expect(isinstance(attr, dict) and _is_id(attr.get("id")),
                    f"{where}.attributes[{a_index}] needs a non-negative integer id", path)
        for m_index, method in enumerate(cls.get("methods", [])):
            m_where = f"{where}.methods[{m_index}]"
            _expect(isinstance(method, dict) and _is_id(method.get("id")),
                    f"{m_where} needs a non-negative integer id", path)
            for key in ("calls", "accesses"):
                refs = method.get(key, [])
                _expect(isinstance(refs, list) and all(_is_id(r) for r in refs),
                        f"{m_where}.{key} must be a list of non-negative integer ids", path)
    return document


def model_from_document(document: Dict[str, Any], source: Path = Path("<memory>")
                        ) -> Tuple[SystemModel, DependencyTable]:
    """Builds a validated model from a parsed facts document.

    Self-calls are dropped and repeated calls/accesses collapse to sets, each
    with a warning. Every remaining invariant breach is collected and raised
    together as FactsValidationError.
    """
    violations: List[Violation] = []
    version = str(document.get("schema_version"))
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        violations.append(Violation(ViolationKind.UNSUPPORTED_SCHEMA, "document", 0,
                                    f"schema_version {version!r} not in {sorted(SUPPORTED_SCHEMA_VERSIONS)}"))

    records: List[ClassRecord] = []
    seen_class_ids: Set[int] = set()
    method_seen: Dict[int, int] = {}
    attribute_seen: Dict[int, int] = {}
    method_names: Dict[int, str] = {}
    attribute_names: Dict[int, str] = {}
    calls: Dict[int, frozenset] = {}
    accesses: Dict[int, frozenset] = {}

    for cls in document["classes"]:
        class_id = cls["id"]
        if class_id in seen_class_ids:
            violations.append(Violation(ViolationKind.DUPLICATE_ID, "class", class_id, "class declared twice"))
            continue
        seen_class_ids.add(class_id)
        attribute_ids: Set[int] = set()
        method_ids: Set[int] = set()
        for attr in cls.get("attributes", []):
            aid = attr["id"]
            if aid in attribute_seen:
                violations.append(Violation(ViolationKind.DUPLICATE_ID, "attribute", aid,
                                            f"declared in classes {attribute_seen[aid]} and {class_id}"))
                continue
            attribute_seen[aid] = class_id
            attribute_ids.add(aid)
            attribute_names[aid] = str(attr.get("name", f"a{aid}"))
        for method in cls.get("methods", []):
            mid = method["id"]
            if mid in method_seen:
                violations.append(Violation(ViolationKind.DUPLICATE_ID, "method", mid,
                                            f"declared in classes {method_seen[mid]} and {class_id}"))
                continue
            method_seen[mid] = class_id
            method_ids.add(mid)
            method_names[mid] = str(method.get("name", f"m{mid}"))
            raw_calls = list(method.get("calls", []))
            raw_accesses = list(method.get("accesses", []))
            if mid in raw_calls:
                logger.warning(f"Ingest: Dropping self-call of method {mid} ('{method_names[mid]}').")
            call_set = frozenset(c for c in raw_calls if c != mid)
            access_set = frozenset(raw_accesses)
            if len(call_set) + raw_calls.count(mid) < len(raw_calls) or len(access_set) < len(raw_accesses):
                logger.warning(f"Ingest: Collapsed repeated dependencies of method {mid}.")
            calls[mid] = call_set
            accesses[mid] = access_set
        records.append(ClassRecord(class_id, str(cls.get("name", f"C{class_id}")),
                                   frozenset(attribute_ids), frozenset(method_ids)))

    model = SystemModel.from_classes(records, method_names, attribute_names)
    deps = DependencyTable(calls, accesses)
    violations.extend(validate(model, deps).violations)
    if violations:
        raise FactsValidationError(sorted(set(violations)), source)
    logger.info(f"Ingest: Loaded {model.n_classes} classes, {model.n_methods} methods, "
                f"{model.n_attributes} attributes from {source}")
    return model, deps


def load_facts(path: Path) -> Tuple[SystemModel, DependencyTable]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise FactsIOError(f"Failed to read facts file {path}: {e}") from e
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FactsParseError(f"Invalid UTF-8 at byte {e.start}: {e.reason}", path, offset=e.start) from e
    return model_from_document(_parse_document(text, path), path)


# --- Writing ---

def document_from_model(model: SystemModel, deps: DependencyTable) -> Dict[str, Any]:
    """Canonical facts document: every array sorted ascending by id."""
    classes = []
    for record in sorted(model.classes, key=lambda c: c.id):
        classes.append({
            "id": record.id,
            "name": record.name,
            "attributes": [
                {"id": aid, "name": model.attribute_names.get(aid, f"a{aid}")}
                for aid in sorted(record.attribute_ids)
            ],
            "methods": [
                {
                    "id": mid,
                    "name": model.method_name(mid),
                    "calls": sorted(deps.calls_of(mid)),
                    "accesses": sorted(deps.accesses_of(mid)),
                }
                for mid in sorted(record.method_ids)
            ],
        })
    return {"schema_version": FACTS_SCHEMA_VERSION, "classes": classes}


def dumps_facts(model: SystemModel, deps: DependencyTable) -> str:
    return json.dumps(document_from_model(model, deps), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_facts(model: SystemModel, deps: DependencyTable, path: Path) -> None:
    path = Path(path)
    result = validate(model, deps)
    if not result.ok:
        raise FactsValidationError(result.violations, path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_facts(model, deps))
    except OSError as e:
        raise FactsIOError(f"Failed to write facts file {path}: {e}") from e
    logger.info(f"Ingest: Wrote {model.n_methods} methods in {model.n_classes} classes to {path}")


# --- Synthetic systems ---

def _nth_outside(n: int, excluded: List[int]) -> int:
    """The n-th non-negative integer (0-based) not in the sorted list `excluded`."""
    candidate = n
    while True:
        shifted = n + bisect.bisect_right(excluded, candidate)
        if shifted == candidate:
            return candidate
        candidate = shifted


def _draw_targets(rng: SplitMix64, count: int, own: List[int], total: int,
                  bias: float, exclude: int = -1) -> Set[int]:
    """Draws `count` targets; same-class with probability `bias`, else any other class.

    A draw whose pool is empty is skipped, so infeasible settings yield fewer
    dependencies rather than errors.
    """
    own_pool = [x for x in own if x != exclude]
    n_others = total - len(own)
    targets: Set[int] = set()
    for _ in range(count):
        if rng.unit() < bias:
            if own_pool:
                targets.add(own_pool[rng.below(len(own_pool))])
        elif n_others > 0:
            targets.add(_nth_outside(rng.below(n_others), own))
    return targets


def generate(config: GeneratorConfig) -> Tuple[SystemModel, DependencyTable]:
    """Deterministic synthetic system for a given config (pure function of it)."""
    config.check()
    rng = SplitMix64(config.seed)
    c = config.n_classes
    class_methods: List[List[int]] = [[] for _ in range(c)]
    class_attributes: List[List[int]] = [[] for _ in range(c)]
    for mid in range(config.n_methods):
        class_methods[mid % c].append(mid)
    for aid in range(config.n_attributes):
        class_attributes[aid % c].append(aid)

    calls: Dict[int, frozenset] = {}
    accesses: Dict[int, frozenset] = {}
    for mid in range(config.n_methods):
        owner = mid % c
        n_calls = rng.between(0, config.max_calls_per_method)
        n_accesses = rng.between(0, config.max_accesses_per_method)
        calls[mid] = frozenset(_draw_targets(
            rng, n_calls, class_methods[owner], config.n_methods, config.intra_class_bias, exclude=mid))
        accesses[mid] = frozenset(_draw_targets(
            rng, n_accesses, class_attributes[owner], config.n_attributes, config.intra_class_bias))

    records = [
        ClassRecord(cid, f"C{cid}", frozenset(class_attributes[cid]), frozenset(class_methods[cid]))
        for cid in range(c)
    ]
    method_names = {mid: f"m{mid}" for mid in range(config.n_methods)}
    attribute_names = {aid: f"a{aid}" for aid in range(config.n_attributes)}
    model = SystemModel.from_classes(records, method_names, attribute_names)
    deps = DependencyTable(calls, accesses)
    logger.debug(f"Ingest: Generated seed={config.seed} c={c} m={config.n_methods} "
                 f"a={config.n_attributes} k_m={config.max_calls_per_method} k_a={config.max_accesses_per_method}")
    return model, deps
