"""Canonical text encodings of objects and morphisms, and conflict rendering.

Object::

    copatch-object 1
    node <id> <label>        one per vertex, ascending id
    rel <x> <y>              one per related pair, ascending (x, y)

Morphism::

    copatch-morphism 1
    src-digest <sha256 of the source's object encoding>
    <target object block>
    map <src-id> <dst-id>    ascending src-id; absent ids are undefined

Labels escape ``%``, CR, LF and bytes that are not valid UTF-8 as ``%XX``.
Decoders accept exactly the encoder's output and nothing else.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .conflict import ConflictFile, PartialMorphism, is_linear, validate_morphism, validate_object
from .errors import DigestMismatch, ParseError, ValidationError

OBJECT_HEADER = "copatch-object 1"
MORPHISM_HEADER = "copatch-morphism 1"

_ESCAPE = re.compile(r"%([0-9A-F]{2})")
_HEX64 = re.compile(r"[0-9a-f]{64}\Z")


def escape_label(label: bytes) -> str:
    out = []
    for ch in label.decode("utf-8", "surrogateescape"):
        if ch == "%":
            out.append("%25")
        elif ch == "\n":
            out.append("%0A")
        elif ch == "\r":
            out.append("%0D")
        elif "\udc80" <= ch <= "\udcff":
            out.append("%%%02X" % (ord(ch) - 0xDC00))
        else:
            out.append(ch)
    return "".join(out)


def unescape_label(token: str, lineno: int | None = None) -> bytes:
    raw = bytearray()
    pos = 0
    for m in _ESCAPE.finditer(token):
        raw += token[pos:m.start()].encode("utf-8", "surrogateescape")
        raw.append(int(m.group(1), 16))
        pos = m.end()
    raw += token[pos:].encode("utf-8", "surrogateescape")
    label = bytes(raw)
    if b"\n" in label:
        raise ParseError("label contains a line feed", lineno)
    if escape_label(label) != token:
        raise ParseError(f"non-canonical label {token!r}", lineno)
    return label


def _int(token: str, lineno: int) -> int:
    if not token.isdigit() or not token.isascii() or str(int(token)) != token:
        raise ParseError(f"bad id {token!r}", lineno)
    return int(token)


def _object_lines(x: ConflictFile) -> list[str]:
    lines = [OBJECT_HEADER]
    lines += [f"node {v} {escape_label(x.label(v))}" for v in x.vertices]
    lines += [f"rel {a} {b}" for a, b in sorted(x.order)]
    return lines


def encode_object(x: ConflictFile) -> bytes:
    return "".join(line + "\n" for line in _object_lines(x)).encode("utf-8", "surrogateescape")


def _split(data: bytes) -> list[str]:
    if not isinstance(data, (bytes, bytearray)):
        raise ParseError("expected bytes")
    try:
        text = bytes(data).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}") from None
    if not text.endswith("\n"):
        raise ParseError("missing final newline")
    return text[:-1].split("\n")


def _parse_object(lines: list[str], first: int) -> ConflictFile:
    """Parse an object block; ``first`` is the 1-based number of its header line."""
    if not lines or lines[0] != OBJECT_HEADER:
        raise ParseError(f"expected {OBJECT_HEADER!r}", first)
    labels: dict[int, bytes] = {}
    order: list[tuple[int, int]] = []
    last_node = -1
    last_rel = None
    for k, line in enumerate(lines[1:], start=first + 1):
        if line.startswith("node "):
            if order:
                raise ParseError("node after rel", k)
            parts = line.split(" ", 2)
            if len(parts) != 3:
                raise ParseError("malformed node line", k)
            v = _int(parts[1], k)
            if v <= last_node:
                raise ParseError("node ids not strictly ascending", k)
            last_node = v
            labels[v] = unescape_label(parts[2], k)
        elif line.startswith("rel "):
            parts = line.split(" ")
            if len(parts) != 3:
                raise ParseError("malformed rel line", k)
            pair = (_int(parts[1], k), _int(parts[2], k))
            if last_rel is not None and pair <= last_rel:
                raise ParseError("rel pairs not strictly ascending", k)
            if pair[0] not in labels or pair[1] not in labels:
                raise ParseError(f"rel mentions unknown id in {pair}", k)
            last_rel = pair
            order.append(pair)
        else:
            raise ParseError(f"unexpected line {line!r}", k)
    x = ConflictFile(labels, order)
    report = validate_object(x)
    if not report:
        raise ValidationError(str(report))
    return x


def decode_object(data: bytes) -> ConflictFile:
    return _parse_object(_split(data), 1)


def digest(x: ConflictFile) -> str:
    return hashlib.sha256(encode_object(x)).hexdigest()


def encode_morphism(m: PartialMorphism) -> bytes:
    lines = [MORPHISM_HEADER, f"src-digest {digest(m.source)}"]
    lines += _object_lines(m.target)
    lines += [f"map {a} {b}" for a, b in m.mapping.items()]
    return "".join(line + "\n" for line in lines).encode("utf-8", "surrogateescape")


@dataclass(frozen=True)
class MorphismRecord:
    """A decoded morphism that has not been attached to its source object yet."""

    src_digest: str
    target: ConflictFile
    mapping: tuple[tuple[int, int], ...]

    def bind(self, source: ConflictFile) -> PartialMorphism:
        if digest(source) != self.src_digest:
            raise DigestMismatch("source object does not match the recorded digest")
        m = PartialMorphism(source, self.target, dict(self.mapping))
        report = validate_morphism(m)
        if not report:
            raise ValidationError(str(report))
        return m


def parse_morphism(data: bytes) -> MorphismRecord:
    lines = _split(data)
    if not lines or lines[0] != MORPHISM_HEADER:
        raise ParseError(f"expected {MORPHISM_HEADER!r}", 1)
    if len(lines) < 3 or not lines[1].startswith("src-digest "):
        raise ParseError("expected src-digest", 2)
    hexd = lines[1][len("src-digest "):]
    if not _HEX64.match(hexd):
        raise ParseError("malformed digest", 2)
    end = len(lines)
    for k in range(2, len(lines)):
        if lines[k].startswith("map "):
            end = k
            break
    target = _parse_object(lines[2:end], 3)
    pairs = []
    for k in range(end, len(lines)):
        lineno = k + 1
        parts = lines[k].split(" ")
        if len(parts) != 3 or parts[0] != "map":
            raise ParseError(f"unexpected line {lines[k]!r}", lineno)
        a, b = _int(parts[1], lineno), _int(parts[2], lineno)
        if pairs and a <= pairs[-1][0]:
            raise ParseError("map ids not strictly ascending", lineno)
        if b not in target.labels:
            raise ParseError(f"map target {b} is not a target vertex", lineno)
        pairs.append((a, b))
    return MorphismRecord(hexd, target, tuple(pairs))


def decode_morphism(data: bytes, source: ConflictFile) -> PartialMorphism:
    return parse_morphism(data).bind(source)


def _components(x: ConflictFile) -> list[frozenset[int]]:
    seen: set[int] = set()
    comps = []
    for v in x.vertices:
        if v in seen:
            continue
        comp = frozenset({v} | {w for w in x.successors(v) if x.less(w, v)})
        seen |= comp
        comps.append(comp)
    return comps


def _render_component(x: ConflictFile, comp: frozenset[int]) -> bytes:
    if len(comp) == 1:
        (v,) = comp
        if not x.less(v, v):
            return x.label(v) + b"\n"
    members = sorted(comp, key=lambda v: (x.label(v), v))
    return b"(cycle\n" + b"".join(x.label(v) + b"\n" for v in members) + b"cycle)\n"


def render_conflicts(x: ConflictFile) -> bytes:
    """Plain lines for a linear object, git-style marker blocks otherwise."""
    plain = is_linear(x)
    if plain is not None:
        return plain.to_bytes()
    comps = _components(x)
    owner = {v: i for i, c in enumerate(comps) for v in c}
    preds: dict[int, set[int]] = {i: set() for i in range(len(comps))}
    for a, b in x.order:
        if owner[a] != owner[b]:
            preds[owner[b]].add(owner[a])
    out = []
    remaining = set(preds)
    while remaining:
        front = [i for i in remaining if not (preds[i] & remaining)]
        texts = []
        for i in front:
            text = _render_component(x, comps[i])
            first = min((x.label(v), v) for v in comps[i])
            texts.append(((first[0], text, first[1]), text))
        texts.sort()
        if len(texts) == 1:
            out.append(texts[0][1])
        else:
            out.append(b"<<<<<<<\n" + b"=======\n".join(t for _, t in texts) + b">>>>>>>\n")
        remaining.difference_update(front)
    return b"".join(out)
