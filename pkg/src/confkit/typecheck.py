"""Subtyping, compliance, and upgrade compatibility.

A configuration complies with a spec when its inferred minimal spec set
refines the authored one node by node.  `direct_check` recomputes the same
verdict straight from the components, without going through inference, and
serves as an independent oracle for it.  Compatibility orders configurations
by "can stand in for": every component of the older one needs a counterpart
in the newer one at the same or a later version.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import AbstractComponentId, ComponentId, Interval, merge_identifiers
from .model import (
    ComponentSpec,
    Configuration,
    InvalidSpec,
    NotAConfiguration,
    SpecSet,
    validate_configuration,
    validate_spec,
)
from .inference import infer


@dataclass(frozen=True, slots=True)
class ComplianceFailure:
    subject: str
    clause: str
    detail: str


@dataclass(frozen=True, slots=True)
class ComplianceVerdict:
    compliant: bool
    failures: tuple[ComplianceFailure, ...] = ()

    @classmethod
    def from_failures(cls, failures: list[ComplianceFailure]) -> ComplianceVerdict:
        return cls(compliant=not failures, failures=tuple(failures))


@dataclass(frozen=True, slots=True)
class CompatReason:
    subject: str
    cause: str


@dataclass(frozen=True, slots=True)
class CompatVerdict:
    compatible: bool
    reasons: tuple[CompatReason, ...] = ()


def component_spec_leq(a: ComponentSpec, b: ComponentSpec) -> bool:
    """a refines b: narrower identity, covered dependencies, included child
    slots and total."""
    if not a.aci <= b.aci:
        return False
    for dep in a.dependencies:
        if not any(dep <= other for other in b.dependencies):
            return False
    for slot in a.children:
        match = b.slot_for(slot.aci.ctype)
        if match is None:
            return False
        if not (slot.aci <= match.aci and slot.count.included_in(match.count)):
            return False
    return a.total.included_in(b.total)


def spec_set_leq(a: SpecSet, b: SpecSet) -> bool:
    """Every node of a refines some node of b."""
    return all(any(component_spec_leq(cs, other) for other in b) for cs in a)


def ctype_order(config: Configuration) -> list[str]:
    """Ctypes in depth-first order from the root, children sorted, first seen
    wins.  Assumes a valid configuration."""
    by_id = config.by_id()
    referenced = {child for c in config for child in c.child_ids}
    root = next(c for c in config if c.id not in referenced)
    order: list[str] = []
    seen: set[str] = set()
    stack = [root.id]
    while stack:
        current = by_id[stack.pop()]
        if current.id.ctype not in seen:
            seen.add(current.id.ctype)
            order.append(current.id.ctype)
        stack.extend(sorted(current.child_ids, key=lambda i: i.sort_key, reverse=True))
    return order


def _checked_spec(spec: SpecSet) -> None:
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpec(report)


def _node_failures(
    inferred: ComponentSpec,
    node: ComponentSpec,
    *,
    strict_lower_bounds: bool,
) -> list[ComplianceFailure]:
    """First failing clause for one ctype, in a fixed clause order."""
    t = inferred.ctype
    if not inferred.aci <= node.aci:
        return [ComplianceFailure(t, "identifier", f"{t} identifiers do not all match the spec node")]

    dep_folds: dict[str, AbstractComponentId] = {}
    for dep in inferred.dependencies:
        if dep.ctype in dep_folds:
            dep_folds[dep.ctype] = dep_folds[dep.ctype].merge(dep)
        else:
            dep_folds[dep.ctype] = dep
    for dep_type in sorted(dep_folds):
        fold = dep_folds[dep_type]
        if not any(fold <= entry for entry in node.dependencies):
            return [ComplianceFailure(
                t, "dependencies",
                f"{t} dependencies on {dep_type} match no dependency entry")]

    for slot in sorted(inferred.children, key=lambda s: s.aci.ctype):
        match = node.slot_for(slot.aci.ctype)
        if match is None:
            return [ComplianceFailure(
                t, "unexpected-child-type",
                f"{t} contains {slot.aci.ctype}, which has no child slot")]
        if not slot.aci <= match.aci:
            return [ComplianceFailure(
                t, "child-identifier",
                f"{t} children of ctype {slot.aci.ctype} do not all match the slot")]
        if not slot.count.included_in(match.count):
            return [ComplianceFailure(
                t, "child-interval",
                f"{t} contains {slot.count} of ctype {slot.aci.ctype}, allowed {match.count}")]

    if not inferred.total.included_in(node.total):
        return [ComplianceFailure(
            t, "total", f"{t} contains {inferred.total} children, allowed {node.total}")]

    if strict_lower_bounds:
        present = {slot.aci.ctype for slot in inferred.children}
        for slot in sorted(node.children, key=lambda s: s.aci.ctype):
            if slot.count.lo >= 1 and slot.aci.ctype not in present:
                return [ComplianceFailure(
                    t, "missing-required-child",
                    f"{t} never contains {slot.aci.ctype}, required at least {slot.count.lo}")]
    return []


def compliant(
    config: Configuration,
    spec: SpecSet,
    *,
    faithful_leaf_rule: bool = False,
    strict_lower_bounds: bool = False,
) -> ComplianceVerdict:
    """Does the configuration comply with the spec?  Failures name the first
    broken clause per ctype, in depth-first order from the root."""
    _checked_spec(spec)
    inferred = infer(config, faithful_leaf_rule=faithful_leaf_rule)
    failures: list[ComplianceFailure] = []
    for ctype in ctype_order(config):
        mine = inferred.spec_for(ctype)
        assert mine is not None
        node = spec.spec_for(ctype)
        if node is None:
            failures.append(ComplianceFailure(
                ctype, "missing-spec-node", f"no spec node of ctype {ctype}"))
            continue
        failures.extend(_node_failures(
            mine, node, strict_lower_bounds=strict_lower_bounds))
    return ComplianceVerdict.from_failures(failures)


def direct_check(
    config: Configuration,
    spec: SpecSet,
    *,
    faithful_leaf_rule: bool = False,
    strict_lower_bounds: bool = False,
) -> ComplianceVerdict:
    """Compliance recomputed structurally from the components themselves.

    Same verdict as `compliant`, derived without building any inferred spec
    set: per ctype, fold the identifiers, group the dependencies, count the
    children.  Kept deliberately independent of the inference code path.
    """
    _checked_spec(spec)
    report = validate_configuration(config)
    if not report.ok:
        raise NotAConfiguration(report)

    grouped: dict[str, list] = {}
    for component in config:
        grouped.setdefault(component.id.ctype, []).append(component)

    failures: list[ComplianceFailure] = []
    for ctype in ctype_order(config):
        members = grouped[ctype]
        node = spec.spec_for(ctype)
        if node is None:
            failures.append(ComplianceFailure(
                ctype, "missing-spec-node", f"no spec node of ctype {ctype}"))
            continue

        if not all(c.id in node.aci for c in members):
            failures.append(ComplianceFailure(
                ctype, "identifier", f"{ctype} identifiers do not all match the spec node"))
            continue

        dep_groups: dict[str, list[ComponentId]] = {}
        for c in members:
            for dep in c.dependencies:
                dep_groups.setdefault(dep.ctype, []).append(dep)
        failed = False
        for dep_type in sorted(dep_groups):
            fold = merge_identifiers(d.to_abstract() for d in dep_groups[dep_type])
            if not any(fold <= entry for entry in node.dependencies):
                failures.append(ComplianceFailure(
                    ctype, "dependencies",
                    f"{ctype} dependencies on {dep_type} match no dependency entry"))
                failed = True
                break
        if failed:
            continue

        # Per child ctype: every member contributes its count (leaves count 0),
        # so one childless member widens the group's lower bound to 0.
        child_types = sorted({child.ctype for c in members for child in c.child_ids})
        for child_type in child_types:
            counts = [len([i for i in c.child_ids if i.ctype == child_type]) for c in members]
            ids = [i for c in members for i in c.child_ids if i.ctype == child_type]
            slot = node.slot_for(child_type)
            if slot is None:
                failures.append(ComplianceFailure(
                    ctype, "unexpected-child-type",
                    f"{ctype} contains {child_type}, which has no child slot"))
                failed = True
                break
            if not all(i in slot.aci for i in ids):
                failures.append(ComplianceFailure(
                    ctype, "child-identifier",
                    f"{ctype} children of ctype {child_type} do not all match the slot"))
                failed = True
                break
            group = Interval(min(counts), max(counts))
            if not group.included_in(slot.count):
                failures.append(ComplianceFailure(
                    ctype, "child-interval",
                    f"{ctype} contains {group} of ctype {child_type}, allowed {slot.count}"))
                failed = True
                break
        if failed:
            continue

        per_leaf = 1 if faithful_leaf_rule else 0
        total = sum(per_leaf if c.is_leaf else len(c.child_ids) for c in members)
        if total not in node.total:
            failures.append(ComplianceFailure(
                ctype, "total",
                f"{ctype} contains {Interval(total, total)} children, allowed {node.total}"))
            continue

        if strict_lower_bounds:
            present = {child.ctype for c in members for child in c.child_ids}
            for slot in sorted(node.children, key=lambda s: s.aci.ctype):
                if slot.count.lo >= 1 and slot.aci.ctype not in present:
                    failures.append(ComplianceFailure(
                        ctype, "missing-required-child",
                        f"{ctype} never contains {slot.aci.ctype}, "
                        f"required at least {slot.count.lo}"))
                    break

    return ComplianceVerdict.from_failures(failures)


def ci_compat_leq(
    a: ComponentId,
    b: ComponentId,
    *,
    composite_a: bool = False,
    relaxed: bool = True,
) -> bool:
    """b can stand in for a: same identity, same or newer version.

    Composites are allowed to change name across releases unless relaxed
    matching is turned off.
    """
    if a.ctype != b.ctype or a.origin != b.origin or a.version > b.version:
        return False
    if a.name != b.name and not (relaxed and composite_a):
        return False
    return True


def config_leq(a: Configuration, b: Configuration, *, relaxed: bool = True) -> bool:
    """Every component of a has a counterpart in b."""
    return all(
        any(
            ci_compat_leq(ca.id, cb.id, composite_a=not ca.is_leaf, relaxed=relaxed)
            for cb in b
        )
        for ca in a
    )


def compatible(
    a: Configuration,
    b: Configuration,
    spec: SpecSet,
    *,
    relaxed: bool = True,
    faithful_leaf_rule: bool = False,
    strict_lower_bounds: bool = False,
) -> CompatVerdict:
    """Is b a compatible successor of a under the spec?

    Both configurations must comply with the spec, and every component of a
    needs a counterpart in b at the same or a newer version.
    """
    reasons: list[CompatReason] = []
    for label, config in (("A", a), ("B", b)):
        verdict = compliant(
            config, spec,
            faithful_leaf_rule=faithful_leaf_rule,
            strict_lower_bounds=strict_lower_bounds)
        if not verdict.compliant:
            subject = verdict.failures[0].subject
            reasons.append(CompatReason(subject, f"not-compliant-{label}"))
    if reasons:
        return CompatVerdict(False, tuple(reasons))

    for ca in sorted(a, key=lambda c: c.sort_key):
        composite_a = not ca.is_leaf
        candidates = [
            cb for cb in b
            if ci_compat_leq(
                ca.id,
                ComponentId(cb.id.ctype, cb.id.name, cb.id.origin, max(cb.id.version, ca.id.version)),
                composite_a=composite_a, relaxed=relaxed)
        ]
        if not candidates:
            reasons.append(CompatReason(str(ca.id), "no-counterpart"))
        elif not any(
            ci_compat_leq(ca.id, cb.id, composite_a=composite_a, relaxed=relaxed)
            for cb in candidates
        ):
            reasons.append(CompatReason(str(ca.id), "version-regression"))
    return CompatVerdict(not reasons, tuple(reasons))
