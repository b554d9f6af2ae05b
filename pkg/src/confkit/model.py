"""Components, configurations, and configuration specifications.

A configuration is a finite set of components forming a tree via children
references, with dependencies pointing at other members.  A configuration
spec is a set of per-ctype nodes carrying identifier constraints, child
slots with count intervals, and dependency constraints.  Validation never
raises on bad input; it returns a report listing every violated condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .algebra import (
    AbstractComponentId,
    ComponentId,
    Interval,
    sum_intervals,
)


@dataclass(frozen=True, slots=True)
class Violation:
    condition: str
    subjects: tuple[str, ...]
    message: str
    severity: str = "error"


@dataclass(frozen=True, slots=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(v.severity == "error" for v in self.violations)

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "error")

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "warning")

    def as_dicts(self) -> list[dict]:
        return [
            {
                "condition": v.condition,
                "subjects": list(v.subjects),
                "message": v.message,
                "severity": v.severity,
            }
            for v in self.violations
        ]


class NotAConfiguration(ValueError):
    """Raised where a valid configuration is required but validation fails."""

    def __init__(self, report: ValidationReport):
        self.report = report
        first = report.errors[0].message if report.errors else "invalid"
        super().__init__(f"not a valid configuration: {first}")


class InvalidSpec(ValueError):
    """Raised where a valid configuration spec is required but validation fails."""

    def __init__(self, report: ValidationReport):
        self.report = report
        first = report.errors[0].message if report.errors else "invalid"
        super().__init__(f"not a valid configuration spec: {first}")


@dataclass(frozen=True, slots=True)
class Component:
    """One deployed component: identifier, dependencies, and payload.

    Leaves carry a set of file elements; composites carry the ids of their
    children.  Exactly one of the two is present.
    """

    id: ComponentId
    dependencies: frozenset[ComponentId] = frozenset()
    elements: frozenset[str] | None = None
    children: frozenset[ComponentId] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "dependencies", frozenset(self.dependencies))
        if (self.elements is None) == (self.children is None):
            raise ValueError(f"{self.id}: exactly one of elements/children required")
        if self.elements is not None:
            object.__setattr__(self, "elements", frozenset(self.elements))
        if self.children is not None:
            object.__setattr__(self, "children", frozenset(self.children))
            overlap = self.dependencies & self.children
            if overlap:
                raise ValueError(f"{self.id}: dependencies overlap children: {sorted(str(i) for i in overlap)}")

    @classmethod
    def leaf(cls, id: ComponentId, elements: Iterable[str] = (), dependencies: Iterable[ComponentId] = ()) -> Component:
        return cls(id=id, dependencies=frozenset(dependencies), elements=frozenset(elements))

    @classmethod
    def composite(cls, id: ComponentId, children: Iterable[ComponentId], dependencies: Iterable[ComponentId] = ()) -> Component:
        return cls(id=id, dependencies=frozenset(dependencies), children=frozenset(children))

    @property
    def is_leaf(self) -> bool:
        return self.elements is not None

    @property
    def child_ids(self) -> frozenset[ComponentId]:
        return self.children if self.children is not None else frozenset()

    @property
    def sort_key(self) -> tuple:
        payload = tuple(sorted(self.elements)) if self.is_leaf else tuple(sorted(i.sort_key for i in self.child_ids))
        return (self.id.sort_key, self.is_leaf, payload, tuple(sorted(d.sort_key for d in self.dependencies)))


@dataclass(frozen=True, slots=True, eq=False)
class Configuration:
    """A set of components.  Construction is lenient; see validate_configuration."""

    components: tuple[Component, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))

    def __iter__(self) -> Iterator[Component]:
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return sorted(c.sort_key for c in self) == sorted(c.sort_key for c in other)

    def __hash__(self) -> int:
        return hash(frozenset(self.components))

    def sorted_components(self) -> list[Component]:
        return sorted(self.components, key=lambda c: c.sort_key)

    def by_id(self) -> dict[ComponentId, Component]:
        return {c.id: c for c in self.components}

    def __contains__(self, id: ComponentId) -> bool:
        return any(c.id == id for c in self.components)


@dataclass(frozen=True, slots=True)
class ChildSlot:
    """A child entry of a spec node: identifier family plus count bounds."""

    aci: AbstractComponentId
    count: Interval


@dataclass(frozen=True, slots=True)
class ComponentSpec:
    """Spec node for one ctype: identity constraints, dependencies, children, total."""

    aci: AbstractComponentId
    dependencies: frozenset[AbstractComponentId] = frozenset()
    children: frozenset[ChildSlot] = frozenset()
    total: Interval = Interval(0, 0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dependencies", frozenset(self.dependencies))
        object.__setattr__(self, "children", frozenset(self.children))
        seen: set[str] = set()
        for slot in self.children:
            if slot.aci.ctype in seen:
                raise ValueError(f"{self.ctype}: more than one child slot of ctype {slot.aci.ctype}")
            seen.add(slot.aci.ctype)

    @property
    def ctype(self) -> str:
        return self.aci.ctype

    def slot_for(self, ctype: str) -> ChildSlot | None:
        for slot in self.children:
            if slot.aci.ctype == ctype:
                return slot
        return None

    @property
    def child_types(self) -> frozenset[str]:
        return frozenset(slot.aci.ctype for slot in self.children)


@dataclass(frozen=True, slots=True)
class SpecSet:
    """A set of spec nodes, at most one per ctype.

    Inference produces these; they are not required to satisfy the structural
    conditions a full configuration spec must meet (see validate_spec).
    """

    specs: frozenset[ComponentSpec] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", frozenset(self.specs))
        seen: set[str] = set()
        for cs in self.specs:
            if cs.ctype in seen:
                raise ValueError(f"more than one spec node of ctype {cs.ctype}")
            seen.add(cs.ctype)

    def __iter__(self) -> Iterator[ComponentSpec]:
        return iter(self.specs)

    def __len__(self) -> int:
        return len(self.specs)

    def spec_for(self, ctype: str) -> ComponentSpec | None:
        for cs in self.specs:
            if cs.ctype == ctype:
                return cs
        return None

    @property
    def ctypes(self) -> frozenset[str]:
        return frozenset(cs.ctype for cs in self.specs)

    def sorted_specs(self) -> list[ComponentSpec]:
        return sorted(self.specs, key=lambda cs: cs.ctype)


class ConfigurationSpec(SpecSet):
    """A spec set intended to satisfy the full well-formedness conditions."""

    __slots__ = ()


def validate_configuration(config: Configuration | Iterable[Component]) -> ValidationReport:
    """Check the configuration conditions; report every violation, raise nothing."""
    components = list(config.components if isinstance(config, Configuration) else config)
    violations: list[Violation] = []

    ids = [c.id for c in components]
    id_set = set(ids)
    seen: set[ComponentId] = set()
    for i in ids:
        if i in seen:
            continue
        if ids.count(i) > 1:
            violations.append(Violation(
                "duplicate-id", (str(i),),
                f"component id {i} declared {ids.count(i)} times"))
            seen.add(i)

    for c in components:
        for child in sorted(c.child_ids, key=lambda i: i.sort_key):
            if child not in id_set:
                violations.append(Violation(
                    "children-closure", (str(c.id), str(child)),
                    f"{c.id} contains {child}, which is not in the configuration"))
        for dep in sorted(c.dependencies, key=lambda i: i.sort_key):
            if dep not in id_set:
                violations.append(Violation(
                    "dependency-closure", (str(c.id), str(dep)),
                    f"{c.id} depends on {dep}, which is not in the configuration"))

    referenced: dict[ComponentId, list[ComponentId]] = {}
    for c in components:
        for child in c.child_ids:
            referenced.setdefault(child, []).append(c.id)

    roots = [c for c in components if c.id not in referenced]
    root_ids = sorted({c.id for c in roots}, key=lambda i: i.sort_key)
    if not components:
        violations.append(Violation("unique-root", (), "configuration is empty"))
    elif not root_ids:
        violations.append(Violation(
            "unique-root", (), "no root: every component is contained in another"))
    elif len(root_ids) > 1:
        violations.append(Violation(
            "unique-root", tuple(str(i) for i in root_ids),
            "more than one root: " + ", ".join(str(i) for i in root_ids)))

    for child, parents in sorted(referenced.items(), key=lambda kv: kv[0].sort_key):
        distinct = sorted(set(parents), key=lambda i: i.sort_key)
        if len(distinct) > 1:
            violations.append(Violation(
                "multiple-parents", (str(child),) + tuple(str(p) for p in distinct),
                f"{child} is contained in more than one component"))

    # The four conditions above admit child-cycles detached from the root;
    # the parent relation is only a tree if everything is reachable from it.
    if len(root_ids) == 1 and not any(v.condition == "duplicate-id" for v in violations):
        by_id = {c.id: c for c in components}
        reachable: set[ComponentId] = set()
        stack = [root_ids[0]]
        while stack:
            current = stack.pop()
            if current in reachable or current not in by_id:
                continue
            reachable.add(current)
            stack.extend(by_id[current].child_ids)
        for c in components:
            if c.id not in reachable:
                violations.append(Violation(
                    "unreachable", (str(c.id),),
                    f"{c.id} is not reachable from the root"))

    return ValidationReport(tuple(violations))


def validate_spec(spec: SpecSet | Iterable[ComponentSpec]) -> ValidationReport:
    """Check the spec conditions; report every violation, raise nothing."""
    nodes = list(spec.specs if isinstance(spec, SpecSet) else spec)
    violations: list[Violation] = []

    ctypes = [cs.ctype for cs in nodes]
    for t in sorted(set(t for t in ctypes if ctypes.count(t) > 1)):
        violations.append(Violation(
            "duplicate-type", (t,), f"more than one spec node of ctype {t}"))

    acis = {cs.aci for cs in nodes}
    by_type: dict[str, ComponentSpec] = {}
    for cs in nodes:
        by_type.setdefault(cs.ctype, cs)

    for cs in sorted(nodes, key=lambda cs: cs.ctype):
        for slot in sorted(cs.children, key=lambda s: s.aci.ctype):
            if slot.aci not in acis:
                violations.append(Violation(
                    "children-closure", (cs.ctype, slot.aci.ctype),
                    f"{cs.ctype} has a child slot for {slot.aci.ctype} "
                    "that matches no spec node"))
        dep_types: set[str] = set()
        for dep in sorted(cs.dependencies, key=lambda d: d.ctype):
            if dep.ctype in dep_types:
                violations.append(Violation(
                    "duplicate-dependency-type", (cs.ctype, dep.ctype),
                    f"{cs.ctype} has more than one dependency entry of ctype {dep.ctype}"))
            dep_types.add(dep.ctype)
            if not any(dep <= aci for aci in acis):
                violations.append(Violation(
                    "dependency-coverage", (cs.ctype, dep.ctype),
                    f"{cs.ctype} depends on {dep.ctype} identifiers "
                    "covered by no spec node"))
            if cs.slot_for(dep.ctype) is not None:
                violations.append(Violation(
                    "dependency-child-overlap", (cs.ctype, dep.ctype),
                    f"{cs.ctype} both contains and depends on ctype {dep.ctype}"))

    referenced: dict[str, list[str]] = {}
    for cs in nodes:
        for slot in cs.children:
            if slot.aci.ctype in by_type:
                referenced.setdefault(slot.aci.ctype, []).append(cs.ctype)

    root_types = sorted(t for t in by_type if t not in referenced)
    if not nodes:
        violations.append(Violation("unique-root", (), "spec is empty"))
    elif not root_types:
        violations.append(Violation(
            "unique-root", (), "no root: every spec node is a child of another"))
    elif len(root_types) > 1:
        violations.append(Violation(
            "unique-root", tuple(root_types),
            "more than one root: " + ", ".join(root_types)))

    for child_type, parents in sorted(referenced.items()):
        distinct = sorted(set(parents))
        if len(distinct) > 1:
            violations.append(Violation(
                "multiple-parents", (child_type,) + tuple(distinct),
                f"{child_type} is a child slot of more than one spec node"))

    for cs in sorted(nodes, key=lambda cs: cs.ctype):
        child_sum = sum_intervals(slot.count for slot in cs.children)
        if not child_sum.included_in(cs.total):
            violations.append(Violation(
                "interval-sum", (cs.ctype,),
                f"{cs.ctype}: children counts sum to {child_sum}, "
                f"not included in total {cs.total}"))
        if cs.children:
            lows = sum(slot.count.lo for slot in cs.children)
            highs = sum_intervals(slot.count for slot in cs.children).hi
            if not (lows <= cs.total.lo and cs.total.hi <= highs):
                violations.append(Violation(
                    "child-sum-advisory", (cs.ctype,),
                    f"{cs.ctype}: total {cs.total} is not bracketed by "
                    f"the children sums [{lows}, {highs}]",
                    severity="warning"))

    return ValidationReport(tuple(violations))


def root_of(config: Configuration) -> Component:
    """The unique component not contained in any other.  Validates first."""
    report = validate_configuration(config)
    if not report.ok:
        raise NotAConfiguration(report)
    referenced = {child for c in config for child in c.child_ids}
    for c in config:
        if c.id not in referenced:
            return c
    raise NotAConfiguration(report)  # unreachable given a clean report


def spec_root(spec: SpecSet) -> ComponentSpec | None:
    """The spec node referenced by no child slot, if exactly one exists."""
    referenced = {slot.aci.ctype for cs in spec for slot in cs.children}
    candidates = [cs for cs in spec.sorted_specs() if cs.ctype not in referenced]
    if len(candidates) == 1:
        return candidates[0]
    return None
