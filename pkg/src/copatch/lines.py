"""Plain files and patches between them.

A file is a finite sequence of labels (one label per line).  A patch from
``a`` to ``b`` is an injective, strictly increasing, label-preserving partial
map from the line positions of ``a`` to those of ``b``: a position with no
image is a deleted line, a target position outside the image is an inserted
line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import InvalidLabel, InvalidPatch, PositionOutOfRange, SourceMismatch
from .report import Report, Violation

Label = bytes
LabelLike = Union[bytes, str]



def as_label(x: LabelLike) -> Label:
    if isinstance(x, str):
        x = x.encode("utf-8")
    if not isinstance(x, bytes):
        raise InvalidLabel(f"label must be bytes or str, got {type(x).__name__}")
    if b"\n" in x:
        raise InvalidLabel(f"label {x!r} contains a line feed")
    return x


@dataclass(frozen=True)
class File:
    lines: tuple[Label, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(as_label(x) for x in self.lines))

    @classmethod
    def of(cls, *lines: LabelLike) -> "File":
        return cls(tuple(lines))

    @classmethod
    def from_chars(cls, text: str) -> "File":
        """One line per character: ``File.from_chars("abc")`` is the file a/b/c."""
        return cls(tuple(text))

    @classmethod
    def from_bytes(cls, data: bytes) -> "File":
        """Split on LF; a trailing LF ends the last line, a CR before LF is dropped."""
        if not data:
            return cls(())
        parts = data.split(b"\n")
        if parts[-1] == b"":
            parts.pop()
        return cls(tuple(p[:-1] if p.endswith(b"\r") else p for p in parts))

    def to_bytes(self) -> bytes:
        return b"".join(line + b"\n" for line in self.lines)

    def __len__(self) -> int:
        return len(self.lines)

    def __getitem__(self, i):
        return self.lines[i]

    def __iter__(self):
        return iter(self.lines)

    def __add__(self, other: "File") -> "File":
        return File(self.lines + other.lines)

    def __repr__(self) -> str:
        return "File(%s)" % ", ".join(repr(x.decode("utf-8", "replace")) for x in self.lines)


EMPTY = File(())


@dataclass(frozen=True)
class Patch:
    """A partial map ``mapping[i]`` (``None`` = line ``i`` deleted).

    Construction does not validate; use :func:`make_patch` or
    :func:`validate_patch` for that.
    """

    source: File
    target: File
    mapping: tuple[int | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(self.mapping))

    def __call__(self, i: int) -> int | None:
        return self.mapping[i]

    def as_dict(self) -> dict[int, int]:
        return {i: j for i, j in enumerate(self.mapping) if j is not None}

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(i for i, j in enumerate(self.mapping) if j is not None)

    def is_identity(self) -> bool:
        return self.source == self.target and self.mapping == tuple(range(len(self.source)))


def make_patch(source, target, mapping) -> Patch:
    """Build a validated patch; ``mapping`` may be a dict or a per-line sequence."""
    source = source if isinstance(source, File) else File(tuple(source))
    target = target if isinstance(target, File) else File(tuple(target))
    if isinstance(mapping, dict):
        mapping = tuple(mapping.get(i) for i in range(len(source)))
    p = Patch(source, target, tuple(mapping))
    report = validate_patch(p)
    if not report:
        raise InvalidPatch(str(report))
    return p


def validate_patch(p: Patch) -> Report:
    out = []
    m, n = len(p.source), len(p.target)
    if len(p.mapping) != m:
        out.append(Violation("shape", f"mapping has {len(p.mapping)} entries for {m} source lines"))
        return Report(tuple(out))
    for i, j in enumerate(p.mapping):
        if j is not None and not (isinstance(j, int) and 0 <= j < n):
            out.append(Violation("range", f"{i} -> {j} is outside the target", (i, j)))
    if out:
        return Report(tuple(out))
    seen: dict[int, int] = {}
    for i, j in enumerate(p.mapping):
        if j is None:
            continue
        if j in seen:
            out.append(Violation("injective", f"{seen[j]} and {i} both map to {j}", (seen[j], i)))
        seen.setdefault(j, i)
    dom = p.domain
    for i, i2 in zip(dom, dom[1:]):
        if p.mapping[i] >= p.mapping[i2]:
            out.append(Violation("increasing", f"{i} < {i2} but {p.mapping[i]} >= {p.mapping[i2]}", (i, i2)))
    for i in dom:
        if p.source[i] != p.target[p.mapping[i]]:
            out.append(Violation("label", f"line {i} relabelled by {i} -> {p.mapping[i]}", (i, p.mapping[i])))
    return Report(tuple(out))


def identity(a: File) -> Patch:
    return Patch(a, a, tuple(range(len(a))))


def compose(f: Patch, g: Patch) -> Patch:
    """Diagrammatic order: first ``f``, then ``g``."""
    if f.target != g.source:
        raise SourceMismatch("compose: target of the first patch is not the source of the second")
    return Patch(
        f.source,
        g.target,
        tuple(None if j is None else g.mapping[j] for j in f.mapping),
    )


def apply_patch(a: File, p: Patch) -> File:
    if a != p.source:
        idx = next(
            (i for i, (x, y) in enumerate(zip(a.lines, p.source.lines)) if x != y),
            min(len(a), len(p.source)),
        )
        raise SourceMismatch(f"file differs from the patch source at line {idx}", idx)
    return p.target


def tensor(f: Patch, g: Patch) -> Patch:
    shift = len(f.target)
    return Patch(
        f.source + g.source,
        f.target + g.target,
        f.mapping + tuple(None if j is None else j + shift for j in g.mapping),
    )


def insert_line(a: File, i: int, x: LabelLike) -> Patch:
    if not 0 <= i <= len(a):
        raise PositionOutOfRange(f"cannot insert at {i} in a file of {len(a)} lines")
    x = as_label(x)
    target = File(a.lines[:i] + (x,) + a.lines[i:])
    return Patch(a, target, tuple(j if j < i else j + 1 for j in range(len(a))))


def delete_line(a: File, i: int) -> Patch:
    if not 0 <= i < len(a):
        raise PositionOutOfRange(f"cannot delete line {i} of a file of {len(a)} lines")
    target = File(a.lines[:i] + a.lines[i + 1:])
    return Patch(a, target, tuple(j if j < i else (None if j == i else j - 1) for j in range(len(a))))


@dataclass(frozen=True)
class Delete:
    position: int


@dataclass(frozen=True)
class Insert:
    position: int
    label: Label


Step = Union[Delete, Insert]


def to_generators(p: Patch) -> list[Step]:
    """Factor ``p`` into single-line deletions (descending) then insertions (ascending)."""
    report = validate_patch(p)
    if not report:
        raise InvalidPatch(str(report))
    steps: list[Step] = [Delete(i) for i in reversed(range(len(p.source))) if p.mapping[i] is None]
    image = {j for j in p.mapping if j is not None}
    steps += [Insert(j, p.target[j]) for j in range(len(p.target)) if j not in image]
    return steps


def replay(source: File, steps: Iterable[Step]) -> Patch:
    """Compose the generator patches described by ``steps``, starting at ``source``."""
    acc = identity(source)
    for step in steps:
        if isinstance(step, Delete):
            acc = compose(acc, delete_line(acc.target, step.position))
        else:
            acc = compose(acc, insert_line(acc.target, step.position, step.label))
    return acc


def lcs_table(a: Sequence, b: Sequence) -> list[list[int]]:
    """``t[i][j]`` is the LCS length of ``a[i:]`` and ``b[j:]``."""
    m, n = len(a), len(b)
    t = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        row, below = t[i], t[i + 1]
        ai = a[i]
        for j in range(n - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    return t


def lcs_matching(a: Sequence, b: Sequence) -> list[tuple[int, int]]:
    """A maximum matching; lexicographically least source indices, then target indices."""
    t = lcs_table(a, b)
    out = []
    i = j = 0
    remaining = t[0][0] if a and b else 0
    while remaining:
        found = False
        for i2 in range(i, len(a)):
            if t[i2][j] < remaining:
                break
            for j2 in range(j, len(b)):
                if t[i2][j2] < remaining:
                    break
                if a[i2] == b[j2] and t[i2 + 1][j2 + 1] == remaining - 1:
                    out.append((i2, j2))
                    i, j = i2 + 1, j2 + 1
                    remaining -= 1
                    found = True
                    break
            if found:
                break
        assert found
    return out


def diff(a: File, b: File) -> Patch:
    """Infer the patch ``a -> b`` keeping as many lines as possible."""
    mapping: list[int | None] = [None] * len(a)
    for i, j in lcs_matching(a.lines, b.lines):
        mapping[i] = j
    return Patch(a, b, tuple(mapping))
