"""Guarded configuration changes: extend, update, remove, undo.

Every operation is pure: it takes a configuration, returns the changed one
plus a journal entry whose inverse restores the input exactly.  A change is
only accepted if the result is a valid, spec-compliant configuration —
otherwise the operation raises and nothing is observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .algebra import ComponentId
from .model import (
    Component,
    Configuration,
    SpecSet,
    validate_configuration,
)
from .typecheck import ComplianceVerdict, compliant


class LifecycleError(Exception):
    """Base class for rejected configuration changes."""


class WouldViolateSpec(LifecycleError):
    def __init__(self, message: str, verdict: ComplianceVerdict | None = None):
        super().__init__(message)
        self.verdict = verdict


class UnknownParent(LifecycleError):
    pass


class DuplicateComponentId(LifecycleError):
    pass


class UnknownComponent(LifecycleError):
    pass


class TypeChanged(LifecycleError):
    pass


class DependencyGuard(LifecycleError):
    def __init__(self, message: str, dependents: tuple[ComponentId, ...] = ()):
        super().__init__(message)
        self.dependents = dependents


class RootRemoval(LifecycleError):
    pass


class JournalMismatch(LifecycleError):
    pass


def _sorted_ids(ids: Iterable[ComponentId]) -> tuple[ComponentId, ...]:
    return tuple(sorted(ids, key=lambda i: i.sort_key))


def _sorted_components(components: Iterable[Component]) -> tuple[Component, ...]:
    return tuple(sorted(components, key=lambda c: c.sort_key))


@dataclass(frozen=True, slots=True)
class ExtendChange:
    """Add a forest of new components, attaching each fragment root to an
    existing composite."""

    components: tuple[Component, ...]
    attachments: tuple[tuple[ComponentId, ComponentId], ...]  # (new root, parent)

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", _sorted_components(self.components))
        object.__setattr__(self, "attachments", tuple(sorted(
            self.attachments, key=lambda p: (p[0].sort_key, p[1].sort_key))))
        ids = [c.id for c in self.components]
        if len(ids) != len(set(ids)):
            raise ValueError("extend payload repeats a component id")
        roots = [root for root, _ in self.attachments]
        if len(roots) != len(set(roots)):
            raise ValueError("extend payload attaches a component twice")

    @classmethod
    def of(cls, components: Iterable[Component], attachments: Mapping[ComponentId, ComponentId]) -> ExtendChange:
        return cls(tuple(components), tuple(attachments.items()))


@dataclass(frozen=True, slots=True)
class UpdateChange:
    """Replace components in place; references to the old ids are rewritten."""

    replacements: tuple[tuple[ComponentId, Component], ...]  # (old id, new component)

    def __post_init__(self) -> None:
        object.__setattr__(self, "replacements", tuple(sorted(
            self.replacements, key=lambda p: p[0].sort_key)))
        olds = [old for old, _ in self.replacements]
        news = [new.id for _, new in self.replacements]
        if len(olds) != len(set(olds)) or len(news) != len(set(news)):
            raise ValueError("update payload repeats a component id")

    @classmethod
    def of(cls, replacements: Mapping[ComponentId, Component]) -> UpdateChange:
        return cls(tuple(replacements.items()))


@dataclass(frozen=True, slots=True)
class RemoveChange:
    """Remove components (each with its whole subtree)."""

    ids: tuple[ComponentId, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", _sorted_ids(self.ids))
        if len(self.ids) != len(set(self.ids)):
            raise ValueError("remove payload repeats a component id")


ChangeSet = ExtendChange | UpdateChange | RemoveChange


@dataclass(frozen=True, slots=True)
class JournalEntry:
    """One accepted change and the change that reverts it.

    ``undoes`` marks a reversal entry: the seq of the entry it cancels.
    Reversals keep a journal append-only while letting consecutive undos
    walk back through the remaining open entries.
    """

    change: ChangeSet
    inverse: ChangeSet
    seq: int = 0
    undoes: int | None = None


def _gate(result: Configuration, spec: SpecSet, *, faithful_leaf_rule: bool, strict_lower_bounds: bool) -> None:
    report = validate_configuration(result)
    if not report.ok:
        first = report.errors[0]
        raise WouldViolateSpec(f"change breaks the configuration: {first.message}")
    verdict = compliant(
        result, spec,
        faithful_leaf_rule=faithful_leaf_rule,
        strict_lower_bounds=strict_lower_bounds)
    if not verdict.compliant:
        first = verdict.failures[0]
        raise WouldViolateSpec(f"result would not comply: {first.detail}", verdict)


def _subtree_ids(config: Configuration, top: ComponentId) -> set[ComponentId]:
    by_id = config.by_id()
    out: set[ComponentId] = set()
    stack = [top]
    while stack:
        current = stack.pop()
        if current in out or current not in by_id:
            continue
        out.add(current)
        stack.extend(by_id[current].child_ids)
    return out


def extend(
    config: Configuration,
    change: ExtendChange,
    spec: SpecSet,
    *,
    faithful_leaf_rule: bool = False,
    strict_lower_bounds: bool = False,
    seq: int = 0,
) -> tuple[Configuration, JournalEntry]:
    existing = {c.id for c in config}
    by_id = config.by_id()
    for component in change.components:
        if component.id in existing:
            raise DuplicateComponentId(f"{component.id} is already in the configuration")
    new_ids = {c.id for c in change.components}
    attach_to: dict[ComponentId, ComponentId] = {}
    for new_root, parent in change.attachments:
        if parent not in existing:
            raise UnknownParent(f"attachment parent {parent} is not in the configuration")
        if by_id[parent].is_leaf:
            raise UnknownParent(f"attachment parent {parent} is a leaf component")
        if new_root not in new_ids:
            raise UnknownComponent(f"attachment root {new_root} is not in the extend payload")
        attach_to[new_root] = parent

    rewritten = []
    for c in config:
        grafts = frozenset(i for i, p in attach_to.items() if p == c.id)
        if grafts:
            rewritten.append(Component.composite(c.id, c.child_ids | grafts, c.dependencies))
        else:
            rewritten.append(c)
    result = Configuration(tuple(rewritten) + change.components)
    _gate(result, spec, faithful_leaf_rule=faithful_leaf_rule, strict_lower_bounds=strict_lower_bounds)
    inverse = RemoveChange(tuple(attach_to.keys()))
    return result, JournalEntry(change=change, inverse=inverse, seq=seq)


def update(
    config: Configuration,
    change: UpdateChange,
    spec: SpecSet,
    *,
    faithful_leaf_rule: bool = False,
    strict_lower_bounds: bool = False,
    seq: int = 0,
) -> tuple[Configuration, JournalEntry]:
    by_id = config.by_id()
    id_map: dict[ComponentId, ComponentId] = {}
    originals: dict[ComponentId, Component] = {}
    for old, new in change.replacements:
        if old not in by_id:
            raise UnknownComponent(f"{old} is not in the configuration")
        if old.ctype != new.id.ctype:
            raise TypeChanged(f"{old} cannot become ctype {new.id.ctype}")
        id_map[old] = new.id
        originals[old] = by_id[old]
    olds = set(id_map)
    for old, new in change.replacements:
        if new.id in by_id and new.id not in olds:
            raise DuplicateComponentId(f"{new.id} is already in the configuration")

    def remap(component: Component) -> Component:
        deps = frozenset(id_map.get(d, d) for d in component.dependencies)
        if component.is_leaf:
            return Component.leaf(component.id, component.elements or (), deps)
        children = frozenset(id_map.get(i, i) for i in component.child_ids)
        return Component.composite(component.id, children, deps)

    pieces = []
    replacement_of = {old: new for old, new in change.replacements}
    for c in config:
        pieces.append(remap(replacement_of.get(c.id, c)))
    result = Configuration(pieces)
    _gate(result, spec, faithful_leaf_rule=faithful_leaf_rule, strict_lower_bounds=strict_lower_bounds)
    inverse = UpdateChange(tuple((new.id, originals[old]) for old, new in change.replacements))
    return result, JournalEntry(change=change, inverse=inverse, seq=seq)


def remove(
    config: Configuration,
    ids: Iterable[ComponentId],
    spec: SpecSet,
    *,
    faithful_leaf_rule: bool = False,
    strict_lower_bounds: bool = False,
    seq: int = 0,
) -> tuple[Configuration, JournalEntry]:
    requested = _sorted_ids(ids)
    by_id = config.by_id()
    referenced = {child for c in config for child in c.child_ids}
    for i in requested:
        if i not in by_id:
            raise UnknownComponent(f"{i} is not in the configuration")
        if i not in referenced:
            raise RootRemoval(f"{i} is the configuration root")

    removed: set[ComponentId] = set()
    for i in requested:
        removed |= _subtree_ids(config, i)
    top_level = [i for i in requested
                 if not any(i in _subtree_ids(config, other) for other in requested if other != i)]

    dependents = _sorted_ids(
        c.id for c in config
        if c.id not in removed and any(d in removed for d in c.dependencies))
    if dependents:
        names = ", ".join(str(i) for i in dependents)
        raise DependencyGuard(f"still depended on by {names}", dependents)

    parent_of: dict[ComponentId, ComponentId] = {}
    for c in config:
        for child in c.child_ids:
            parent_of[child] = c.id

    pieces = []
    for c in config:
        if c.id in removed:
            continue
        drop = c.child_ids & removed
        if drop:
            pieces.append(Component.composite(c.id, c.child_ids - drop, c.dependencies))
        else:
            pieces.append(c)
    result = Configuration(pieces)
    _gate(result, spec, faithful_leaf_rule=faithful_leaf_rule, strict_lower_bounds=strict_lower_bounds)

    inverse = ExtendChange(
        components=tuple(by_id[i] for i in sorted(removed, key=lambda i: i.sort_key)),
        attachments=tuple((i, parent_of[i]) for i in top_level),
    )
    return result, JournalEntry(change=RemoveChange(requested), inverse=inverse, seq=seq)


def _apply_raw(config: Configuration, change: ChangeSet) -> Configuration:
    """Apply a change structurally, without the spec gate.  Used by undo."""
    if isinstance(change, ExtendChange):
        existing = {c.id for c in config}
        by_id = config.by_id()
        attach_to = dict(change.attachments)
        for component in change.components:
            if component.id in existing:
                raise DuplicateComponentId(f"{component.id} is already present")
        for new_root, parent in change.attachments:
            if parent not in existing or by_id[parent].is_leaf:
                raise UnknownParent(f"no composite {parent} to attach to")
        rewritten = []
        for c in config:
            grafts = frozenset(i for i, p in attach_to.items() if p == c.id)
            if grafts:
                rewritten.append(Component.composite(c.id, c.child_ids | grafts, c.dependencies))
            else:
                rewritten.append(c)
        return Configuration(tuple(rewritten) + change.components)

    if isinstance(change, UpdateChange):
        by_id = config.by_id()
        id_map = {}
        for old, new in change.replacements:
            if old not in by_id:
                raise UnknownComponent(f"{old} is not in the configuration")
            id_map[old] = new.id
        replacement_of = {old: new for old, new in change.replacements}
        pieces = []
        for c in config:
            target = replacement_of.get(c.id, c)
            deps = frozenset(id_map.get(d, d) for d in target.dependencies)
            if target.is_leaf:
                pieces.append(Component.leaf(target.id, target.elements or (), deps))
            else:
                children = frozenset(id_map.get(i, i) for i in target.child_ids)
                pieces.append(Component.composite(target.id, children, deps))
        return Configuration(pieces)

    assert isinstance(change, RemoveChange)
    by_id = config.by_id()
    for i in change.ids:
        if i not in by_id:
            raise UnknownComponent(f"{i} is not in the configuration")
    removed: set[ComponentId] = set()
    for i in change.ids:
        removed |= _subtree_ids(config, i)
    pieces = []
    for c in config:
        if c.id in removed:
            continue
        drop = c.child_ids & removed
        if drop:
            pieces.append(Component.composite(c.id, c.child_ids - drop, c.dependencies))
        else:
            pieces.append(c)
    return Configuration(pieces)


def undo(config: Configuration, entry: JournalEntry) -> Configuration:
    """Apply the entry's inverse, restoring the configuration the entry was
    produced from.  No spec gate: the restored state was accepted before."""
    try:
        result = _apply_raw(config, entry.inverse)
    except (LifecycleError, ValueError) as exc:
        raise JournalMismatch(f"entry does not match this configuration: {exc}") from exc
    report = validate_configuration(result)
    if not report.ok:
        raise JournalMismatch(
            f"undo result is not a valid configuration: {report.errors[0].message}")
    return result
