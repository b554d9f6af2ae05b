"""Minimal-spec inference: from a configuration to the tightest spec set it obeys.

Each component yields a one-node spec set describing exactly itself; the specs
of a whole configuration are folded together with `unify`, which merges nodes
of the same ctype: identifier families union, dependency entries of one ctype
merge, child slots widen to cover both sides, totals add.
"""

from __future__ import annotations

from typing import Iterable

from .algebra import AbstractComponentId, Interval, merge_identifiers
from .model import (
    ChildSlot,
    ComponentSpec,
    Component,
    Configuration,
    NotAConfiguration,
    SpecSet,
    validate_configuration,
)


def unify_dependencies(
    a: Iterable[AbstractComponentId], b: Iterable[AbstractComponentId]
) -> frozenset[AbstractComponentId]:
    """Union of two dependency sets, merging entries of the same ctype."""
    by_type: dict[str, AbstractComponentId] = {}
    for aci in sorted(list(a) + list(b), key=lambda x: x.ctype):
        if aci.ctype in by_type:
            by_type[aci.ctype] = by_type[aci.ctype].merge(aci)
        else:
            by_type[aci.ctype] = aci
    return frozenset(by_type.values())


def unify_children(
    a: Iterable[ChildSlot], b: Iterable[ChildSlot]
) -> frozenset[ChildSlot]:
    """Cover both child maps: one-sided slots get their lower bound widened to 0,
    same-ctype slots merge identifiers and keep [min lo, max hi]."""
    left = {slot.aci.ctype: slot for slot in a}
    right = {slot.aci.ctype: slot for slot in b}
    out: list[ChildSlot] = []
    for ctype in sorted(left.keys() | right.keys()):
        ls, rs = left.get(ctype), right.get(ctype)
        if ls is None:
            assert rs is not None
            out.append(ChildSlot(rs.aci, Interval(0, rs.count.hi)))
        elif rs is None:
            out.append(ChildSlot(ls.aci, Interval(0, ls.count.hi)))
        else:
            count = Interval(min(ls.count.lo, rs.count.lo), max(ls.count.hi, rs.count.hi))
            out.append(ChildSlot(ls.aci.merge(rs.aci), count))
    return frozenset(out)


def unify(a: SpecSet, b: SpecSet) -> SpecSet:
    """Merge two spec sets; nodes present on one side only pass through."""
    left = {cs.ctype: cs for cs in a}
    right = {cs.ctype: cs for cs in b}
    out: list[ComponentSpec] = []
    for ctype in sorted(left.keys() | right.keys()):
        ls, rs = left.get(ctype), right.get(ctype)
        if ls is None:
            assert rs is not None
            out.append(rs)
        elif rs is None:
            out.append(ls)
        else:
            out.append(ComponentSpec(
                aci=ls.aci.merge(rs.aci),
                dependencies=unify_dependencies(ls.dependencies, rs.dependencies),
                children=unify_children(ls.children, rs.children),
                total=ls.total + rs.total,
            ))
    return SpecSet(frozenset(out))


def infer_component(component: Component, *, faithful_leaf_rule: bool = False) -> SpecSet:
    """The one-node spec set describing exactly this component.

    A leaf's own total is [0,0] by default; with faithful_leaf_rule it is
    [1,1], counting the leaf as occupying one slot of its own.
    """
    aci = component.id.to_abstract()
    deps = frozenset(d.to_abstract() for d in component.dependencies)
    if component.is_leaf:
        total = Interval(1, 1) if faithful_leaf_rule else Interval(0, 0)
        return SpecSet(frozenset({ComponentSpec(aci=aci, dependencies=deps, total=total)}))
    groups: dict[str, list] = {}
    for child in component.child_ids:
        groups.setdefault(child.ctype, []).append(child)
    slots = frozenset(
        ChildSlot(
            merge_identifiers(ci.to_abstract() for ci in members),
            Interval(len(members), len(members)),
        )
        for members in groups.values()
    )
    k = len(component.child_ids)
    spec = ComponentSpec(aci=aci, dependencies=deps, children=slots, total=Interval(k, k))
    return SpecSet(frozenset({spec}))


def infer(config: Configuration, *, faithful_leaf_rule: bool = False) -> SpecSet:
    """The minimal spec set a valid configuration complies with."""
    report = validate_configuration(config)
    if not report.ok:
        raise NotAConfiguration(report)
    acc: SpecSet | None = None
    for component in config:
        single = infer_component(component, faithful_leaf_rule=faithful_leaf_rule)
        acc = single if acc is None else unify(acc, single)
    assert acc is not None  # a valid configuration is non-empty
    return acc
