"""Counting intervals and identifier set-expressions.

Everything here is a small immutable value: closed intervals over the
naturals (with an unbounded upper end), set-expressions describing families
of component names / origins / versions, and the concrete and abstract
component identifiers built from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

INF: float = math.inf

# A natural number, or INF for "unbounded".
NatInf = int | float


class TypeMismatch(ValueError):
    """Merge of identifiers with different component types."""


def _check_nat(value: object, what: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{what} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed count interval [lo, hi]; hi may be INF."""

    lo: int
    hi: NatInf

    def __post_init__(self) -> None:
        _check_nat(self.lo, "interval lower bound")
        if self.hi != INF:
            _check_nat(self.hi, "interval upper bound")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __add__(self, other: Interval) -> Interval:
        # INF absorbs: n + INF == INF
        hi = INF if self.hi == INF or other.hi == INF else self.hi + other.hi
        return Interval(self.lo + other.lo, hi)

    def included_in(self, other: Interval) -> bool:
        return self.lo >= other.lo and self.hi <= other.hi

    def __contains__(self, count: int) -> bool:
        return self.lo <= count <= self.hi

    @property
    def unbounded(self) -> bool:
        return self.hi == INF

    def __str__(self) -> str:
        return f"{self.lo}..{'*' if self.hi == INF else self.hi}"


def sum_intervals(intervals: Iterable[Interval]) -> Interval:
    """Componentwise sum; the empty sum is [0, 0]."""
    total = Interval(0, 0)
    for iv in intervals:
        total = total + iv
    return total


@dataclass(frozen=True, slots=True)
class NameSet:
    """Names matched by a node: everything, literal names, or prefix families.

    A prefix entry ``p`` stands for every name starting with ``p``.  Values
    are normalized on construction: literals already covered by a prefix and
    prefixes covered by a shorter prefix are dropped, so equal denotations
    compare equal.
    """

    literals: frozenset[str] = frozenset()
    prefixes: frozenset[str] = frozenset()
    is_any: bool = False

    def __post_init__(self) -> None:
        if self.is_any:
            object.__setattr__(self, "literals", frozenset())
            object.__setattr__(self, "prefixes", frozenset())
            return
        prefixes = frozenset(self.prefixes)
        for p in prefixes:
            if not p:
                raise ValueError("prefix patterns must be non-empty")
        keep = frozenset(
            p for p in prefixes
            if not any(p != q and p.startswith(q) for q in prefixes)
        )
        literals = frozenset(
            n for n in frozenset(self.literals)
            if not any(n.startswith(q) for q in keep)
        )
        object.__setattr__(self, "literals", literals)
        object.__setattr__(self, "prefixes", keep)

    @classmethod
    def everything(cls) -> NameSet:
        return cls(is_any=True)

    @classmethod
    def of(cls, *names: str) -> NameSet:
        return cls(literals=frozenset(names))

    def __contains__(self, name: str) -> bool:
        if self.is_any:
            return True
        return name in self.literals or any(name.startswith(p) for p in self.prefixes)

    def issubset(self, other: NameSet) -> bool:
        if other.is_any:
            return True
        if self.is_any:
            return False
        # A prefix family is infinite, so only a covering prefix can absorb it.
        return all(n in other for n in self.literals) and all(
            any(p.startswith(q) for q in other.prefixes) for p in self.prefixes
        )

    def union(self, other: NameSet) -> NameSet:
        if self.is_any or other.is_any:
            return NameSet(is_any=True)
        return NameSet(self.literals | other.literals, self.prefixes | other.prefixes)


@dataclass(frozen=True, slots=True)
class OriginSet:
    """Origins accepted by a node: everything or a finite set."""

    values: frozenset[str] = frozenset()
    is_any: bool = False

    def __post_init__(self) -> None:
        if self.is_any:
            object.__setattr__(self, "values", frozenset())
        else:
            object.__setattr__(self, "values", frozenset(self.values))

    @classmethod
    def everything(cls) -> OriginSet:
        return cls(is_any=True)

    @classmethod
    def of(cls, *origins: str) -> OriginSet:
        return cls(values=frozenset(origins))

    def __contains__(self, origin: str) -> bool:
        return self.is_any or origin in self.values

    def issubset(self, other: OriginSet) -> bool:
        if other.is_any:
            return True
        if self.is_any:
            return False
        return self.values <= other.values

    def union(self, other: OriginSet) -> OriginSet:
        if self.is_any or other.is_any:
            return OriginSet(is_any=True)
        return OriginSet(self.values | other.values)


@dataclass(frozen=True, slots=True, eq=False)
class VersionSet:
    """Versions accepted by a node: a finite set or a closed/right-open span.

    "any" is the span 0..*.  Exactly one of ``values``/``span`` is set.
    Equality is by denotation: a contiguous finite set equals the span with
    the same bounds.  Unions are exact between finite sets; a union touching
    a span falls back to the smallest enclosing span (an upper bound).
    """

    values: frozenset[int] | None = None
    span: Interval | None = None

    def __post_init__(self) -> None:
        if (self.values is None) == (self.span is None):
            raise ValueError("exactly one of values/span must be given")
        if self.values is not None:
            values = frozenset(self.values)
            for v in values:
                _check_nat(v, "version")
            object.__setattr__(self, "values", values)

    @classmethod
    def everything(cls) -> VersionSet:
        return cls(span=Interval(0, INF))

    @classmethod
    def of(cls, *versions: int) -> VersionSet:
        return cls(values=frozenset(versions))

    @classmethod
    def between(cls, lo: int, hi: NatInf) -> VersionSet:
        return cls(span=Interval(lo, hi))

    @property
    def is_any(self) -> bool:
        return self.span is not None and self.span.lo == 0 and self.span.hi == INF

    def _key(self) -> tuple:
        if self.span is not None:
            return ("span", self.span.lo, self.span.hi)
        vs = self.values
        assert vs is not None
        if vs and len(vs) == max(vs) - min(vs) + 1:
            return ("span", min(vs), max(vs))
        return ("finite", tuple(sorted(vs)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VersionSet):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __contains__(self, version: int) -> bool:
        if self.span is not None:
            return version in self.span
        assert self.values is not None
        return version in self.values

    def issubset(self, other: VersionSet) -> bool:
        if self.values is not None and other.values is not None:
            return self.values <= other.values
        if self.values is not None:
            return all(v in other for v in self.values)
        assert self.span is not None
        if other.span is not None:
            return self.span.included_in(other.span)
        assert other.values is not None
        if self.span.hi == INF:
            return False
        if self.span.hi - self.span.lo + 1 > len(other.values):
            return False
        return all(v in other.values for v in range(self.span.lo, int(self.span.hi) + 1))

    def union(self, other: VersionSet) -> VersionSet:
        if self.values is not None and other.values is not None:
            return VersionSet(values=self.values | other.values)
        if self.values == frozenset():
            return other
        if other.values == frozenset():
            return self
        parts = []
        for vs in (self, other):
            if vs.span is not None:
                parts.append((vs.span.lo, vs.span.hi))
            else:
                assert vs.values is not None
                parts.append((min(vs.values), max(vs.values)))
        lo = min(p[0] for p in parts)
        hi = max(p[1] for p in parts)
        return VersionSet(span=Interval(lo, hi))


@dataclass(frozen=True, slots=True)
class ComponentId:
    """Concrete identifier: (ctype, name, origin, version)."""

    ctype: str
    name: str
    origin: str
    version: int

    def __post_init__(self) -> None:
        for field_name in ("ctype", "name", "origin"):
            if not getattr(self, field_name):
                raise ValueError(f"component id {field_name} must be non-empty")
        _check_nat(self.version, "version")

    @property
    def sort_key(self) -> tuple[str, str, int, str]:
        return (self.ctype, self.name, self.version, self.origin)

    def to_abstract(self) -> AbstractComponentId:
        return AbstractComponentId(
            ctype=self.ctype,
            names=NameSet.of(self.name),
            origins=OriginSet.of(self.origin),
            versions=VersionSet.of(self.version),
        )

    def __str__(self) -> str:
        return f"{self.ctype}({self.name}, {self.origin}, v{self.version})"


@dataclass(frozen=True, slots=True)
class AbstractComponentId:
    """A family of component identifiers of one ctype."""

    ctype: str
    names: NameSet = NameSet(is_any=True)
    origins: OriginSet = OriginSet(is_any=True)
    versions: VersionSet = VersionSet.everything()

    def __post_init__(self) -> None:
        if not self.ctype:
            raise ValueError("ctype must be non-empty")

    def merge(self, other: AbstractComponentId) -> AbstractComponentId:
        if self.ctype != other.ctype:
            raise TypeMismatch(f"cannot merge {self.ctype} with {other.ctype}")
        return AbstractComponentId(
            ctype=self.ctype,
            names=self.names.union(other.names),
            origins=self.origins.union(other.origins),
            versions=self.versions.union(other.versions),
        )

    def __le__(self, other: AbstractComponentId) -> bool:
        return (
            self.ctype == other.ctype
            and self.names.issubset(other.names)
            and self.origins.issubset(other.origins)
            and self.versions.issubset(other.versions)
        )

    def __contains__(self, ci: ComponentId) -> bool:
        return (
            self.ctype == ci.ctype
            and ci.name in self.names
            and ci.origin in self.origins
            and ci.version in self.versions
        )


def merge_identifiers(acis: Iterable[AbstractComponentId]) -> AbstractComponentId:
    """Fold merge over a non-empty iterable of same-ctype identifiers."""
    it: Iterator[AbstractComponentId] = iter(acis)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("merge_identifiers needs at least one identifier") from None
    for aci in it:
        acc = acc.merge(aci)
    return acc
