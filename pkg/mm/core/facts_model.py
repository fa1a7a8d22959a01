# mm/core/facts_model.py
"""In-memory entity model shared by every other module.

Classes, methods and attributes live in three separate dense id spaces
(0..N-1 per kind). Names are kept for reporting; all computation is id-based.
Instances are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

from .errors import ModelIntegrityError


class Tag(str, Enum):
    METHOD = "M"
    ATTRIBUTE = "A"


# A property is a tagged id: (Tag.METHOD, 3) and (Tag.ATTRIBUTE, 3) are distinct.
Property = Tuple[Tag, int]
PropertySet = FrozenSet[Property]


class ViolationKind(str, Enum):
    DUPLICATE_ID = "duplicate_id"
    DANGLING_ID = "dangling_id"
    SELF_CALL = "self_call"
    NON_CONTIGUOUS_ID = "non_contiguous_id"
    OWNERSHIP_MISMATCH = "ownership_mismatch"
    MALFORMED = "malformed"
    UNSUPPORTED_SCHEMA = "unsupported_schema"


@dataclass(frozen=True, order=True)
class Violation:
    kind: ViolationKind
    entity: str  # "class", "method", "attribute", "document"
    id: int
    detail: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.entity} {self.id}: {self.detail}" if self.detail \
            else f"{self.kind.value} {self.entity} {self.id}"


@dataclass(frozen=True)
class ValidationResult:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ClassRecord:
    id: int
    name: str
    attribute_ids: FrozenSet[int] = frozenset()
    method_ids: FrozenSet[int] = frozenset()


def _plain_map(data: Mapping) -> Dict:
    # Plain dicts so models pickle into worker processes; never mutated after construction.
    return dict(data)


@dataclass(frozen=True, eq=False)
class SystemModel:
    classes: Tuple[ClassRecord, ...]
    method_owner: Mapping[int, int]
    attribute_owner: Mapping[int, int]
    method_names: Mapping[int, str] = field(default_factory=dict)
    attribute_names: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("method_owner", "attribute_owner", "method_names", "attribute_names"):
            object.__setattr__(self, name, _plain_map(getattr(self, name)))

    @classmethod
    def from_classes(cls, classes: Iterable[ClassRecord],
                     method_names: Mapping[int, str] | None = None,
                     attribute_names: Mapping[int, str] | None = None) -> "SystemModel":
        """Builds the owner maps from class membership."""
        records = tuple(sorted(classes, key=lambda c: c.id))
        method_owner: Dict[int, int] = {}
        attribute_owner: Dict[int, int] = {}
        for record in records:
            for mid in record.method_ids:
                method_owner.setdefault(mid, record.id)
            for aid in record.attribute_ids:
                attribute_owner.setdefault(aid, record.id)
        return cls(records, method_owner, attribute_owner,
                   dict(method_names or {}), dict(attribute_names or {}))

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def n_methods(self) -> int:
        return len(self.method_owner)

    @property
    def n_attributes(self) -> int:
        return len(self.attribute_owner)

    def class_record(self, class_id: int) -> ClassRecord:
        if not (0 <= class_id < len(self.classes)) or self.classes[class_id].id != class_id:
            raise ModelIntegrityError(f"Unknown class id {class_id}")
        return self.classes[class_id]

    def owner_of_method(self, method_id: int) -> int:
        try:
            return self.method_owner[method_id]
        except KeyError:
            raise ModelIntegrityError(f"Unknown method id {method_id}") from None

    def owner_of_attribute(self, attribute_id: int) -> int:
        try:
            return self.attribute_owner[attribute_id]
        except KeyError:
            raise ModelIntegrityError(f"Unknown attribute id {attribute_id}") from None

    def method_name(self, method_id: int) -> str:
        return self.method_names.get(method_id, f"m{method_id}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SystemModel):
            return NotImplemented
        return (self.classes == other.classes
                and dict(self.method_owner) == dict(other.method_owner)
                and dict(self.attribute_owner) == dict(other.attribute_owner)
                and dict(self.method_names) == dict(other.method_names)
                and dict(self.attribute_names) == dict(other.attribute_names))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class DependencyTable:
    calls: Mapping[int, FrozenSet[int]]
    accesses: Mapping[int, FrozenSet[int]]

    def __post_init__(self):
        object.__setattr__(self, "calls", _plain_map({k: frozenset(v) for k, v in self.calls.items()}))
        object.__setattr__(self, "accesses", _plain_map({k: frozenset(v) for k, v in self.accesses.items()}))

    def calls_of(self, method_id: int) -> FrozenSet[int]:
        return self.calls.get(method_id, frozenset())

    def accesses_of(self, method_id: int) -> FrozenSet[int]:
        return self.accesses.get(method_id, frozenset())

    def __contains__(self, method_id: object) -> bool:
        return method_id in self.calls or method_id in self.accesses

    @property
    def max_calls(self) -> int:
        return max((len(v) for v in self.calls.values()), default=0)

    @property
    def max_accesses(self) -> int:
        return max((len(v) for v in self.accesses.values()), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DependencyTable):
            return NotImplemented
        # Methods without dependencies may be present as empty sets or absent.
        def _nonempty(mapping):
            return {k: v for k, v in mapping.items() if v}
        return (_nonempty(self.calls) == _nonempty(other.calls)
                and _nonempty(self.accesses) == _nonempty(other.accesses))

    __hash__ = None  # type: ignore[assignment]


def properties_of(method: int, deps: DependencyTable) -> PropertySet:
    """Called methods (method-tagged) united with accessed attributes (attribute-tagged)."""
    if method not in deps:
        raise ModelIntegrityError(f"Unknown method id {method}")
    return frozenset(
        [(Tag.METHOD, m) for m in deps.calls_of(method)]
        + [(Tag.ATTRIBUTE, a) for a in deps.accesses_of(method)]
    )


def _contiguity_violations(ids: Iterable[int], entity: str) -> List[Violation]:
    present = set(ids)
    if not present:
        return []
    return [
        Violation(ViolationKind.NON_CONTIGUOUS_ID, entity, missing, f"{entity} ids must be contiguous from 0")
        for missing in range(max(present) + 1) if missing not in present
    ]


def validate(model: SystemModel, deps: DependencyTable) -> ValidationResult:
    """Checks every model invariant and returns all violations; never raises."""
    violations: List[Violation] = []

    seen_classes: set = set()
    method_membership: Dict[int, int] = {}
    attribute_membership: Dict[int, int] = {}
    for record in model.classes:
        if record.id in seen_classes:
            violations.append(Violation(ViolationKind.DUPLICATE_ID, "class", record.id, "class declared twice"))
        seen_classes.add(record.id)
        for mid in sorted(record.method_ids):
            if mid in method_membership:
                violations.append(Violation(ViolationKind.DUPLICATE_ID, "method", mid,
                                            f"owned by classes {method_membership[mid]} and {record.id}"))
            else:
                method_membership[mid] = record.id
        for aid in sorted(record.attribute_ids):
            if aid in attribute_membership:
                violations.append(Violation(ViolationKind.DUPLICATE_ID, "attribute", aid,
                                            f"owned by classes {attribute_membership[aid]} and {record.id}"))
            else:
                attribute_membership[aid] = record.id

    violations += _contiguity_violations(seen_classes, "class")
    violations += _contiguity_violations(method_membership, "method")
    violations += _contiguity_violations(attribute_membership, "attribute")

    for mid in sorted(set(model.method_owner) | set(method_membership)):
        declared, member_of = model.method_owner.get(mid), method_membership.get(mid)
        if declared != member_of:
            violations.append(Violation(ViolationKind.OWNERSHIP_MISMATCH, "method", mid,
                                        f"owner map says {declared}, membership says {member_of}"))
    for aid in sorted(set(model.attribute_owner) | set(attribute_membership)):
        declared, member_of = model.attribute_owner.get(aid), attribute_membership.get(aid)
        if declared != member_of:
            violations.append(Violation(ViolationKind.OWNERSHIP_MISMATCH, "attribute", aid,
                                        f"owner map says {declared}, membership says {member_of}"))

    for mid in sorted(set(deps.calls) | set(deps.accesses)):
        if mid not in method_membership:
            violations.append(Violation(ViolationKind.DANGLING_ID, "method", mid,
                                        "dependencies declared for a method no class owns"))
        for target in sorted(deps.calls_of(mid)):
            if target == mid:
                violations.append(Violation(ViolationKind.SELF_CALL, "method", mid, "method calls itself"))
            elif target not in method_membership:
                violations.append(Violation(ViolationKind.DANGLING_ID, "method", target,
                                            f"called by method {mid} but owned by no class"))
        for target in sorted(deps.accesses_of(mid)):
            if target not in attribute_membership:
                violations.append(Violation(ViolationKind.DANGLING_ID, "attribute", target,
                                            f"accessed by method {mid} but owned by no class"))

    return ValidationResult(tuple(violations))
