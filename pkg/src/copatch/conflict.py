"""Conflict files: finite labelled sets with a transitive relation.

Objects generalise plain files: a file ``abc`` becomes three vertices with the
strict total order ``0 < 1 < 2``.  Incomparable vertices are alternatives the
user still has to choose between; cycles (and loops ``x < x``) are legal and
arise when two histories order the same lines in opposite ways.  Morphisms are
partial maps that preserve labels and the relation where defined.  The empty
object is initial and :func:`pushout` computes merges.  When every map is
total the merge is a true pushout; once a leg deletes lines, some cocones have
no monotone mediating map and :func:`mediating` raises
:class:`~copatch.errors.NoMediatingMorphism`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import (
    InvalidPatch,
    NoMediatingMorphism,
    NotACocone,
    SourceMismatch,
    ValidationError,
)
from .lines import File, LabelLike, Patch, as_label, validate_patch
from .report import Report, Violation


def transitive_closure(pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    succ: dict[int, set[int]] = {}
    for x, y in pairs:
        succ.setdefault(x, set()).add(y)
    out = set()
    for start in succ:
        seen: set[int] = set()
        stack = list(succ[start])
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            stack.extend(succ.get(y, ()))
        out.update((start, y) for y in seen)
    return frozenset(out)


class ConflictFile:
    """Immutable ``(vertices, labels, order)``.

    ``order`` is stored as given: build through :func:`conflict_file` (which
    closes it) or check with :func:`validate_object`.
    """

    __slots__ = ("_labels", "_order", "_hash", "_succ", "_pred")

    def __init__(self, labels: Mapping[int, LabelLike], order: Iterable[tuple[int, int]] = ()):
        self._labels = MappingProxyType({int(k): as_label(v) for k, v in sorted(labels.items())})
        self._order = frozenset((int(x), int(y)) for x, y in order)
        self._hash = None
        self._succ = None
        self._pred = None

    @property
    def labels(self) -> Mapping[int, bytes]:
        return self._labels

    @property
    def order(self) -> frozenset[tuple[int, int]]:
        return self._order

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def label(self, v: int) -> bytes:
        return self._labels[v]

    def less(self, x: int, y: int) -> bool:
        return (x, y) in self._order

    def successors(self, v: int) -> frozenset[int]:
        if self._succ is None:
            self._build_adjacency()
        return self._succ.get(v, frozenset())

    def predecessors(self, v: int) -> frozenset[int]:
        if self._pred is None:
            self._build_adjacency()
        return self._pred.get(v, frozenset())

    def _build_adjacency(self):
        succ: dict[int, set[int]] = {}
        pred: dict[int, set[int]] = {}
        for x, y in self._order:
            succ.setdefault(x, set()).add(y)
            pred.setdefault(y, set()).add(x)
        self._succ = {k: frozenset(v) for k, v in succ.items()}
        self._pred = {k: frozenset(v) for k, v in pred.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConflictFile):
            return NotImplemented
        return self._labels == other._labels and self._order == other._order

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((tuple(self._labels.items()), self._order))
        return self._hash

    def __repr__(self) -> str:
        nodes = ", ".join(f"{k}:{v.decode('utf-8', 'replace')}" for k, v in self._labels.items())
        rel = ", ".join(f"{x}<{y}" for x, y in sorted(self._order))
        return f"ConflictFile({{{nodes}}}, {{{rel}}})"


def conflict_file(labels: Mapping[int, LabelLike], order: Iterable[tuple[int, int]] = ()) -> ConflictFile:
    """Build an object, closing ``order`` transitively."""
    return ConflictFile(labels, transitive_closure(order))


class PartialMorphism:
    __slots__ = ("source", "target", "_map", "_hash")

    def __init__(self, source: ConflictFile, target: ConflictFile, mapping: Mapping[int, int]):
        self.source = source
        self.target = target
        self._map = MappingProxyType({int(k): int(v) for k, v in sorted(mapping.items())})
        self._hash = None

    @property
    def mapping(self) -> Mapping[int, int]:
        return self._map

    def __call__(self, v: int) -> int | None:
        return self._map.get(v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialMorphism):
            return NotImplemented
        return self._map == other._map and self.source == other.source and self.target == other.target

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.source, self.target, tuple(self._map.items())))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k}->{v}" for k, v in self._map.items())
        return f"PartialMorphism({{{body}}})"


def initial() -> ConflictFile:
    return ConflictFile({}, ())


def embed(a: File) -> ConflictFile:
    n = len(a)
    return ConflictFile(dict(enumerate(a.lines)), ((i, j) for i in range(n) for j in range(i + 1, n)))


def embed_patch(p: Patch) -> PartialMorphism:
    report = validate_patch(p)
    if not report:
        raise InvalidPatch(str(report))
    return PartialMorphism(embed(p.source), embed(p.target), p.as_dict())


def validate_object(x: ConflictFile) -> Report:
    out = []
    verts = set(x.labels)
    for a, b in sorted(x.order):
        if a not in verts or b not in verts:
            out.append(Violation("dangling", f"pair ({a}, {b}) mentions an unknown id", (a, b)))
    for a, b in sorted(x.order):
        for c in sorted(x.successors(b)):
            if (a, c) not in x.order:
                out.append(Violation("transitive", f"{a}<{b}<{c} but not {a}<{c}", (a, b, c)))
    for v in x.vertices:
        if v < 0:
            out.append(Violation("id", f"negative id {v}", (v,)))
    return Report(tuple(out))


def validate_morphism(m: PartialMorphism) -> Report:
    out = []
    for k, v in m.mapping.items():
        if k not in m.source.labels:
            out.append(Violation("dangling", f"{k} is not a source vertex", (k,)))
        elif v not in m.target.labels:
            out.append(Violation("dangling", f"{k} -> {v}: {v} is not a target vertex", (k, v)))
        elif m.source.label(k) != m.target.label(v):
            out.append(Violation("label", f"{k} -> {v} changes the label", (k, v)))
    if out:
        return Report(tuple(out))
    for a, b in sorted(m.source.order):
        fa, fb = m(a), m(b)
        if fa is not None and fb is not None and not m.target.less(fa, fb):
            out.append(Violation("monotone", f"{a}<{b} but not {fa}<{fb}", (a, b)))
    return Report(tuple(out))


def identity_p(x: ConflictFile) -> PartialMorphism:
    return PartialMorphism(x, x, {v: v for v in x.vertices})


def empty_morphism(x: ConflictFile) -> PartialMorphism:
    """The unique morphism out of the initial object."""
    return PartialMorphism(initial(), x, {})


def compose_p(f: PartialMorphism, g: PartialMorphism) -> PartialMorphism:
    """Diagrammatic order: first ``f``, then ``g``."""
    if f.target != g.source:
        raise SourceMismatch("compose_p: target of the first morphism is not the source of the second")
    out = {}
    for a, b in f.mapping.items():
        c = g(b)
        if c is not None:
            out[a] = c
    return PartialMorphism(f.source, g.target, out)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


_BOTTOM = (2, -1)


@dataclass(frozen=True)
class PushoutResult:
    """Apex of ``B <-f- A -g-> C`` with its two legs; ``f`` and ``g`` are kept for mediation."""

    apex: ConflictFile
    leg_b: PartialMorphism
    leg_c: PartialMorphism
    f: PartialMorphism
    g: PartialMorphism


def pushout(f: PartialMorphism, g: PartialMorphism) -> PushoutResult:
    if f.source != g.source:
        raise SourceMismatch("pushout: the two morphisms do not share a source")
    b, c = f.target, g.target
    uf = _UnionFind()
    for v in b.vertices:
        uf.find((0, v))
    for v in c.vertices:
        uf.find((1, v))
    uf.find(_BOTTOM)
    for a in f.source.vertices:
        fa, ga = f(a), g(a)
        uf.union((0, fa) if fa is not None else _BOTTOM, (1, ga) if ga is not None else _BOTTOM)

    dead = uf.find(_BOTTOM)
    classes: dict = {}
    for key in list(uf.parent):
        if key == _BOTTOM:
            continue
        root = uf.find(key)
        if root != dead:
            classes.setdefault(root, []).append(key)
    ranked = sorted(classes.values(), key=min)
    where: dict = {}
    labels = {}
    for new_id, members in enumerate(ranked):
        seen = {(b if side == 0 else c).label(v) for side, v in members}
        assert len(seen) == 1, f"label clash in pushout class {members}"
        labels[new_id] = seen.pop()
        for key in members:
            where[key] = new_id
    rel = set()
    for side, obj in ((0, b), (1, c)):
        for x, y in obj.order:
            kx, ky = (side, x), (side, y)
            if kx in where and ky in where:
                rel.add((where[kx], where[ky]))
    apex = ConflictFile(labels, transitive_closure(rel))
    leg_b = PartialMorphism(b, apex, {v: where[(0, v)] for v in b.vertices if (0, v) in where})
    leg_c = PartialMorphism(c, apex, {v: where[(1, v)] for v in c.vertices if (1, v) in where})
    return PushoutResult(apex, leg_b, leg_c, f, g)


def coproduct(a: ConflictFile, b: ConflictFile) -> PushoutResult:
    """Disjoint union, computed as the pushout of the two arrows out of ``initial()``."""
    return pushout(empty_morphism(a), empty_morphism(b))


def mediating(colimit: PushoutResult, h: PartialMorphism, k: PartialMorphism) -> PartialMorphism:
    """The unique ``m`` with ``leg_b ; m = h`` and ``leg_c ; m = k``.

    Raises :class:`NotACocone` when ``h`` and ``k`` disagree on the span and
    :class:`NoMediatingMorphism` when the only candidate is not monotone.
    """
    if h.source != colimit.leg_b.source or k.source != colimit.leg_c.source:
        raise SourceMismatch("mediating: cocone legs do not start at the span's feet")
    if h.target != k.target:
        raise SourceMismatch("mediating: cocone legs do not share a target")
    fh = compose_p(colimit.f, h)
    gk = compose_p(colimit.g, k)
    if fh.mapping != gk.mapping:
        bad = next(a for a in colimit.f.source.vertices if fh(a) != gk(a))
        raise NotACocone(f"cocone disagrees on span element {bad}: {fh(bad)} vs {gk(bad)}", bad)
    values: dict[int, set] = {v: set() for v in colimit.apex.vertices}
    for leg, arrow in ((colimit.leg_b, h), (colimit.leg_c, k)):
        for x, v in leg.mapping.items():
            values[v].add(arrow(x))
    out = {}
    for v, vals in values.items():
        assert len(vals) == 1, f"cocone is not constant on class {v}"
        val = vals.pop()
        if val is not None:
            out[v] = val
    m = PartialMorphism(colimit.apex, h.target, out)
    report = validate_morphism(m)
    if not report:
        bad = report.violations[0]
        raise NoMediatingMorphism(f"induced map is not a morphism: {bad.message}", bad.witness)
    return m


def _signature(x: ConflictFile, v: int):
    return (x.label(v), x.less(v, v), len(x.successors(v)), len(x.predecessors(v)))


def is_isomorphic(a: ConflictFile, b: ConflictFile) -> dict[int, int] | None:
    """First label- and order-preserving bijection ``a -> b`` found, else ``None``."""
    if len(a) != len(b) or len(a.order) != len(b.order):
        return None
    sig_a = {v: _signature(a, v) for v in a.vertices}
    sig_b = {v: _signature(b, v) for v in b.vertices}
    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return None
    by_sig: dict = {}
    for v in b.vertices:
        by_sig.setdefault(sig_b[v], []).append(v)
    todo = a.vertices
    assign: dict[int, int] = {}
    used: set[int] = set()

    def fits(u: int, w: int) -> bool:
        for u2, w2 in assign.items():
            if a.less(u, u2) != b.less(w, w2) or a.less(u2, u) != b.less(w2, w):
                return False
        return True

    def search(i: int) -> bool:
        if i == len(todo):
            return True
        u = todo[i]
        for w in by_sig[sig_a[u]]:
            if w not in used and fits(u, w):
                assign[u] = w
                used.add(w)
                if search(i + 1):
                    return True
                del assign[u]
                used.discard(w)
        return False

    return dict(assign) if search(0) else None


def rename(x: ConflictFile, perm: Mapping[int, int]) -> ConflictFile:
    return ConflictFile({perm[v]: l for v, l in x.labels.items()}, ((perm[p], perm[q]) for p, q in x.order))


def linear_order(x: ConflictFile) -> list[int] | None:
    """Vertices listed along the order if it is a strict total order, else ``None``."""
    n = len(x)
    if len(x.order) != n * (n - 1) // 2:
        return None
    if any(p == q for p, q in x.order):
        return None
    ranked = sorted(x.vertices, key=lambda v: len(x.predecessors(v)))
    for i, v in enumerate(ranked):
        if len(x.predecessors(v)) != i:
            return None
    for p, q in zip(ranked, ranked[1:]):
        if not x.less(p, q):
            return None
    return ranked


def is_linear(x: ConflictFile) -> File | None:
    ranked = linear_order(x)
    if ranked is None:
        return None
    return File(tuple(x.label(v) for v in ranked))


def hom(a: ConflictFile, b: ConflictFile) -> Iterator[PartialMorphism]:
    """Every morphism ``a -> b``, by brute force over partial maps."""
    choices = [[None] + [w for w in b.vertices if b.label(w) == a.label(v)] for v in a.vertices]
    order = sorted(a.order)
    for image in itertools.product(*choices):
        m = dict(zip(a.vertices, image))
        if all(
            m[p] is None or m[q] is None or b.less(m[p], m[q])
            for p, q in order
        ):
            yield PartialMorphism(a, b, {k: v for k, v in m.items() if v is not None})


def transitive_relations(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    pairs = [(i, j) for i in range(n) for j in range(n)]
    for bits in range(1 << len(pairs)):
        rel = frozenset(p for k, p in enumerate(pairs) if bits >> k & 1)
        if transitive_closure(rel) == rel:
            yield rel


def all_objects(max_vertices: int, labels: Iterable[LabelLike], up_to_iso: bool = True) -> list[ConflictFile]:
    """Every object on ids ``0..n-1`` for ``n <= max_vertices``."""
    labels = [as_label(x) for x in labels]
    out: list[ConflictFile] = []
    for n in range(max_vertices + 1):
        rels = list(transitive_relations(n))
        found: list[ConflictFile] = []
        for labs in itertools.product(labels, repeat=n):
            for rel in rels:
                x = ConflictFile(dict(enumerate(labs)), rel)
                if up_to_iso and any(is_isomorphic(x, y) is not None for y in found):
                    continue
                found.append(x)
        out.extend(found)
    return out


POINT = -1


@dataclass(frozen=True)
class PointedGraph:
    """A graph with a basepoint joined to and from every vertex (and to itself)."""

    labels: Mapping[int, bytes]
    edges: frozenset[tuple[int, int]]
    point: int = POINT


@dataclass(frozen=True)
class PointedMorphism:
    source: PointedGraph
    target: PointedGraph
    mapping: Mapping[int, int]


def _pointed_object(x: ConflictFile) -> PointedGraph:
    edges = set(x.order)
    for v in x.vertices:
        edges.add((v, POINT))
        edges.add((POINT, v))
    edges.add((POINT, POINT))
    return PointedGraph(MappingProxyType(dict(x.labels)), frozenset(edges))


def to_pointed(m: PartialMorphism) -> PointedMorphism:
    total = {v: m.mapping.get(v, POINT) for v in m.source.vertices}
    total[POINT] = POINT
    return PointedMorphism(_pointed_object(m.source), _pointed_object(m.target), MappingProxyType(total))


def _unpointed_object(g: PointedGraph) -> ConflictFile:
    return ConflictFile(g.labels, ((p, q) for p, q in g.edges if g.point not in (p, q)))


def from_pointed(pm: PointedMorphism) -> PartialMorphism:
    point = pm.target.point
    return PartialMorphism(
        _unpointed_object(pm.source),
        _unpointed_object(pm.target),
        {k: v for k, v in pm.mapping.items() if k != pm.source.point and v != point},
    )


def validate_pointed(pm: PointedMorphism) -> Report:
    out = []
    if pm.mapping.get(pm.source.point) != pm.target.point:
        out.append(Violation("point", "basepoint is not preserved"))
    for p, q in sorted(pm.source.edges):
        e = (pm.mapping[p], pm.mapping[q])
        if e not in pm.target.edges:
            out.append(Violation("edge", f"edge {p}->{q} has no image", (p, q)))
    for v, w in pm.mapping.items():
        if v != pm.source.point and w != pm.target.point and pm.source.labels[v] != pm.target.labels[w]:
            out.append(Violation("label", f"{v} -> {w} changes the label", (v, w)))
    return Report(tuple(out))


def compose_pointed(f: PointedMorphism, g: PointedMorphism) -> PointedMorphism:
    if f.target != g.source:
        raise SourceMismatch("compose_pointed: endpoints differ")
    return PointedMorphism(f.source, g.target, MappingProxyType({k: g.mapping[v] for k, v in f.mapping.items()}))


def require_valid(x) -> None:
    report = validate_object(x) if isinstance(x, ConflictFile) else validate_morphism(x)
    if not report:
        raise ValidationError(str(report))
