"""Repositories as event structures whose events carry patches.

An event's patch starts at the state of its causes and the state of any
configuration is obtained by merging (pushing out) the patches of its events
one at a time.  Every vertex of a computed state carries a set of provenance
names ``(event id, vertex id)`` recording which event introduced it; these
names are what make transitions between states canonical.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping

from .conflict import (
    ConflictFile,
    PartialMorphism,
    PushoutResult,
    embed,
    initial,
    is_linear,
    linear_order,
    pushout,
)
from .errors import (
    BaseMismatch,
    ConflictedState,
    DigestMismatch,
    EventClash,
    NoChange,
    NotAConfiguration,
    ParseError,
    TooLarge,
    ValidationError,
)
from .lines import File, diff, lcs_matching
from .render import MorphismRecord, encode_morphism, parse_morphism
from .report import Report, Violation

EventId = Hashable


@dataclass(frozen=True)
class EventStructure:
    """Events with their immediate causes and a symmetric conflict relation."""

    events: frozenset
    causes: Mapping
    conflicts: frozenset = frozenset()

    @classmethod
    def build(cls, causes: Mapping[EventId, Iterable[EventId]], conflicts: Iterable[tuple] = ()) -> "EventStructure":
        events = frozenset(causes)
        return cls(events, {e: frozenset(c) for e, c in causes.items()}, frozenset(tuple(p) for p in conflicts))

    def down(self, e) -> frozenset:
        """Strict causes of ``e``: its downward closure without ``e`` itself."""
        seen: set = set()
        stack = list(self.causes.get(e, ()))
        while stack:
            c = stack.pop()
            if c not in seen:
                seen.add(c)
                stack.extend(self.causes.get(c, ()))
        return frozenset(seen)

    def up(self, e) -> frozenset:
        """``e`` and everything it causes."""
        return frozenset(x for x in self.events if x == e or e in self.down(x))

    def leq(self, a, b) -> bool:
        return a == b or a in self.down(b)

    def maximal(self, x: Iterable | None = None) -> frozenset:
        x = self.events if x is None else frozenset(x)
        covered = {c for e in x for c in self.causes.get(e, ())}
        return frozenset(e for e in x if e not in covered)

    def is_downward_closed(self, x: Iterable) -> bool:
        x = frozenset(x)
        return all(c in x for e in x for c in self.causes.get(e, ()))

    def is_configuration(self, x: Iterable, ignore_conflicts: bool = False) -> bool:
        x = frozenset(x)
        if not x <= self.events or not self.is_downward_closed(x):
            return False
        if ignore_conflicts:
            return True
        return not any(a in x and b in x for a, b in self.conflicts)


def validate_es(es: EventStructure) -> Report:
    """Structural check; :func:`hereditary_closure` is the repair for ``hereditary`` failures."""
    out = []
    for e, cs in es.causes.items():
        for c in cs:
            if c not in es.events:
                out.append(Violation("dangling", f"{e} is caused by unknown event {c}", (e, c)))
    if out:
        return Report(tuple(out))
    cyclic = [e for e in sorted(es.events, key=str) if e in es.down(e)]
    if cyclic:
        out.append(Violation("cycle", f"causality is cyclic through {cyclic[0]}", tuple(cyclic)))
        return Report(tuple(out))
    for a, b in sorted(es.conflicts, key=str):
        if a not in es.events or b not in es.events:
            out.append(Violation("dangling", f"conflict ({a}, {b}) mentions an unknown event", (a, b)))
        elif a == b:
            out.append(Violation("irreflexive", f"{a} conflicts with itself", (a,)))
        elif (b, a) not in es.conflicts:
            out.append(Violation("symmetric", f"{a} # {b} without {b} # {a}", (a, b)))
    for a, b in sorted(es.conflicts, key=str):
        if a not in es.events or b not in es.events:
            continue
        for a2 in sorted(es.up(a), key=str):
            if (a2, b) not in es.conflicts:
                out.append(Violation("hereditary", f"{a} <= {a2} and {a} # {b} but not {a2} # {b}", (a, a2, b)))
    return Report(tuple(out))


def hereditary_closure(es: EventStructure) -> EventStructure:
    closed = set()
    for a, b in es.conflicts:
        for a2 in es.up(a):
            for b2 in es.up(b):
                closed.add((a2, b2))
                closed.add((b2, a2))
    return EventStructure(es.events, es.causes, frozenset(closed))


def configurations(es: EventStructure, ignore_conflicts: bool = False, limit: int = 16) -> frozenset:
    return trace_graph(es, ignore_conflicts, limit).nodes


@dataclass(frozen=True)
class TraceGraph:
    nodes: frozenset
    edges: frozenset  # (x, e, x | {e})


def trace_graph(es: EventStructure, ignore_conflicts: bool = False, limit: int = 16) -> TraceGraph:
    if len(es.events) > limit:
        raise TooLarge(f"{len(es.events)} events exceed the enumeration bound {limit}")
    start = frozenset()
    nodes = {start}
    edges = set()
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for e in es.events - x:
                y = x | {e}
                if es.causes[e] <= x and es.is_configuration(y, ignore_conflicts):
                    edges.add((x, e, y))
                    if y not in nodes:
                        nodes.add(y)
                        nxt.append(y)
        frontier = nxt
    return TraceGraph(frozenset(nodes), frozenset(edges))


def linear_extensions(es: EventStructure, x: Iterable) -> Iterator[tuple]:
    x = frozenset(x)

    def walk(done: frozenset, prefix: tuple):
        if done == x:
            yield prefix
            return
        for e in sorted(x - done, key=str):
            if es.causes[e] <= done:
                yield from walk(done | {e}, prefix + (e,))

    yield from walk(frozenset(), ())


@dataclass(frozen=True)
class Event:
    """Causes plus the canonical encoding of the event's patch.

    The id is the SHA-256 of :meth:`encode`, so equal history deduplicates.
    """

    causes: frozenset
    patch: bytes
    id: str = field(default="", compare=False)

    def encode(self) -> bytes:
        head = "".join(f"cause {c}\n" for c in sorted(self.causes))
        return head.encode("ascii") + self.patch

    @classmethod
    def create(cls, causes: Iterable[str], patch: bytes) -> "Event":
        ev = cls(frozenset(causes), patch)
        return cls(ev.causes, patch, hashlib.sha256(ev.encode()).hexdigest())

    @classmethod
    def decode(cls, data: bytes) -> "Event":
        causes = []
        rest = data
        while rest.startswith(b"cause "):
            line, sep, rest = rest.partition(b"\n")
            if not sep:
                raise ParseError("truncated cause line")
            causes.append(line[len("cause "):].decode("ascii", "replace"))
        if causes != sorted(set(causes)):
            raise ParseError("cause lines are not sorted and unique")
        parse_morphism(rest)
        return cls.create(causes, rest)


@dataclass(frozen=True)
class NamedState:
    """A state together with the provenance names of each vertex."""

    obj: ConflictFile
    names: Mapping[int, frozenset]


def transport(src: NamedState, dst: NamedState) -> PartialMorphism:
    """Send each vertex to the vertex of ``dst`` that shares its provenance."""
    where = {}
    for v, ns in dst.names.items():
        for n in ns:
            where[n] = v
    out = {}
    for v, ns in src.names.items():
        hits = {where[n] for n in ns if n in where}
        assert len(hits) <= 1, f"vertex {v} splits into {hits}"
        if hits:
            out[v] = hits.pop()
    return PartialMorphism(src.obj, dst.obj, out)


def infer_morphism(x: ConflictFile, b: File) -> PartialMorphism:
    """A morphism from a (possibly conflicted) object to ``embed(b)`` keeping many lines.

    Vertices on cycles or loops are dropped; the rest are linearised by a
    topological sort (ties by label, then id) and matched against ``b`` with
    the same longest-common-subsequence rule as :func:`copatch.lines.diff`.
    """
    keep = [v for v in x.vertices if not x.less(v, v)]
    keep_set = set(keep)
    indeg = {v: sum(1 for p in x.predecessors(v) if p in keep_set) for v in keep}
    ready = sorted((x.label(v), v) for v in keep if indeg[v] == 0)
    lin = []
    while ready:
        _, v = ready.pop(0)
        lin.append(v)
        for w in x.successors(v):
            if w in keep_set:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append((x.label(w), w))
        ready.sort()
    matches = lcs_matching([x.label(v) for v in lin], b.lines)
    return PartialMorphism(x, embed(b), {lin[i]: j for i, j in matches})


class Repository:
    """A finite set of events (keyed by id) plus a conflict relation.

    ``record``, ``resolve`` and ``add_event`` mutate the repository in place;
    ``import_repository`` returns a new one.  States are memoised per
    configuration and stay valid as events are added.
    """

    def __init__(self, events: Iterable[Event] = (), conflicts: Iterable[tuple] = ()):
        self.events: dict[str, Event] = {}
        for ev in events:
            self.events[ev.id] = ev
        self.conflicts = frozenset(tuple(p) for p in conflicts)
        self._memo: dict[frozenset, NamedState] = {frozenset(): NamedState(initial(), {})}
        self._records: dict[str, MorphismRecord] = {}
        self._bound: dict[str, PartialMorphism] = {}

    @property
    def es(self) -> EventStructure:
        return EventStructure(
            frozenset(self.events),
            {e: ev.causes for e, ev in self.events.items()},
            self.conflicts,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Repository):
            return NotImplemented
        return self.events == other.events and self.conflicts == other.conflicts

    def _causes(self, e) -> frozenset:
        return self.events[e].causes

    def down(self, e) -> frozenset:
        seen: set = set()
        stack = list(self._causes(e))
        while stack:
            c = stack.pop()
            if c not in seen:
                seen.add(c)
                stack.extend(self._causes(c))
        return frozenset(seen)

    def maximal(self, x: Iterable | None = None) -> frozenset:
        x = frozenset(self.events) if x is None else frozenset(x)
        covered = {c for e in x for c in self._causes(e)}
        return frozenset(e for e in x if e not in covered)

    def record_of(self, e: str) -> MorphismRecord:
        rec = self._records.get(e)
        if rec is None:
            rec = self._records[e] = parse_morphism(self.events[e].patch)
        return rec

    def base(self, e: str) -> PartialMorphism:
        """The event's patch, attached to the computed state of its causes."""
        m = self._bound.get(e)
        if m is None:
            src = self._named(self.down(e)).obj
            try:
                m = self.record_of(e).bind(src)
            except DigestMismatch:
                raise BaseMismatch(f"patch of event {e} does not start at the state of its causes") from None
            self._bound[e] = m
        return m

    def _extend(self, cur: NamedState, e: str) -> tuple[NamedState, PushoutResult]:
        """Merge event ``e`` into ``cur``, whose configuration must contain the causes of ``e``."""
        below = self._named(self.down(e))
        m = self.base(e)
        u = transport(below, cur)
        po = pushout(m, u)
        target_names: dict[int, set] = {t: set() for t in m.target.vertices}
        for v, t in m.mapping.items():
            target_names[t] |= below.names[v]
        for t, ns in target_names.items():
            if not ns:
                ns.add((e, t))
        names: dict[int, set] = {v: set() for v in po.apex.vertices}
        for t, v in po.leg_b.mapping.items():
            names[v] |= target_names[t]
        for w, v in po.leg_c.mapping.items():
            names[v] |= cur.names[w]
        return NamedState(po.apex, {v: frozenset(ns) for v, ns in names.items()}), po

    def _named(self, x: frozenset) -> NamedState:
        hit = self._memo.get(x)
        if hit is not None:
            return hit
        stack = [x]
        while stack:
            y = stack[-1]
            if y in self._memo:
                stack.pop()
                continue
            e = min(self.maximal(y))
            need = [z for z in (y - {e}, self.down(e)) if z not in self._memo]
            if need:
                stack.extend(need)
                continue
            self._memo[y] = self._extend(self._memo[y - {e}], e)[0]
            stack.pop()
        return self._memo[x]

    def _check_closed(self, x: frozenset, ignore_conflicts: bool):
        if not x <= frozenset(self.events):
            raise NotAConfiguration(f"unknown events {sorted(x - frozenset(self.events))}")
        if not self.es.is_configuration(x, ignore_conflicts):
            raise NotAConfiguration("not downward closed" + ("" if ignore_conflicts else " and conflict free"))

    def state(self, x: Iterable, ignore_conflicts: bool = False) -> ConflictFile:
        x = frozenset(x)
        self._check_closed(x, ignore_conflicts)
        return self._named(x).obj

    def named_state(self, x: Iterable) -> NamedState:
        x = frozenset(x)
        self._check_closed(x, True)
        return self._named(x)

    def repo_state(self) -> ConflictFile:
        return self._named(frozenset(self.events)).obj

    def state_along(self, order: Iterable[str]) -> ConflictFile:
        """Merge the events one at a time in the given order (a linear extension)."""
        cur = self._memo[frozenset()]
        done: set = set()
        for e in order:
            if not self._causes(e) <= done:
                raise NotAConfiguration(f"{e} appears before one of its causes")
            cur = self._extend(cur, e)[0]
            done.add(e)
        return cur.obj

    def transition(self, x: Iterable, y: Iterable) -> PartialMorphism:
        """The canonical morphism ``state(x) -> state(y)`` for ``x`` a subset of ``y``."""
        x, y = frozenset(x), frozenset(y)
        if not x <= y:
            raise NotAConfiguration("transition needs x to be a subset of y")
        return transport(self.named_state(x), self.named_state(y))

    def add_event(self, causes: Iterable[str], patch: PartialMorphism) -> str:
        causes = frozenset(causes)
        missing = causes - frozenset(self.events)
        if missing:
            raise NotAConfiguration(f"unknown causes {sorted(missing)}")
        below = set(causes)
        for c in causes:
            below |= self.down(c)
        if patch.source != self._named(frozenset(below)).obj:
            raise BaseMismatch("patch does not start at the state of its causes")
        ev = Event.create(causes, encode_morphism(patch))
        self.events.setdefault(ev.id, ev)
        return ev.id

    def linear_state(self) -> tuple[NamedState, File | None]:
        cur = self._named(frozenset(self.events))
        return cur, is_linear(cur.obj)

    def record(self, new_file: File, allow_empty: bool = False) -> str:
        cur, plain = self.linear_state()
        if plain is None:
            raise ConflictedState("the repository state has unresolved conflicts")
        p = diff(plain, new_file)
        if p.is_identity() and not allow_empty:
            raise NoChange("nothing to record")
        ranked = linear_order(cur.obj)
        mapping = {v: p.mapping[i] for i, v in enumerate(ranked) if p.mapping[i] is not None}
        return self.add_event(self.maximal(), PartialMorphism(cur.obj, embed(new_file), mapping))

    def resolve(self, new_file: File) -> str:
        """Record ``new_file`` above every head, starting from the (conflicted) state."""
        cur = self._named(frozenset(self.events))
        return self.add_event(self.maximal(), infer_morphism(cur.obj, new_file))

    def import_repository(self, other: "Repository") -> "Repository":
        for e in self.events.keys() & other.events.keys():
            if self.events[e].encode() != other.events[e].encode():
                raise EventClash(f"event {e} differs between the repositories")
        merged = Repository(list(self.events.values()) + list(other.events.values()))
        es = EventStructure(merged.es.events, merged.es.causes, self.conflicts | other.conflicts)
        report = validate_es(EventStructure(es.events, es.causes))
        if not report:
            raise ValidationError(str(report))
        merged.conflicts = hereditary_closure(es).conflicts
        merged._memo.update(self._memo)
        merged._memo.update(other._memo)
        return merged

    def topological(self) -> list[str]:
        done: set = set()
        out = []
        pending = set(self.events)
        while pending:
            ready = sorted(e for e in pending if self._causes(e) <= done)
            if not ready:
                raise ValidationError("causality is cyclic")
            e = ready[0]
            out.append(e)
            done.add(e)
            pending.discard(e)
        return out

    def check(self) -> Report:
        report = validate_es(self.es)
        if not report:
            return report
        out = []
        for e in self.topological():
            try:
                self.base(e)
            except (BaseMismatch, ValidationError, ParseError) as exc:
                out.append(Violation("base", f"event {e}: {exc}", (e,)))
        return Report(tuple(out))
