"""Hypothesis strategies for files, patches, conflict files and morphisms."""

from __future__ import annotations

from hypothesis import strategies as st

from copatch.conflict import ConflictFile, conflict_file, hom
from copatch.lines import File, Patch


def files(max_size: int = 6, alphabet: str = "ab"):
    return st.lists(st.sampled_from(alphabet), max_size=max_size).map(lambda xs: File(tuple(xs)))


@st.composite
def patches_from(draw, source: File, max_inserts: int = 3, alphabet: str = "ab"):
    keep = [draw(st.booleans()) for _ in range(len(source))]
    kept = [i for i, k in enumerate(keep) if k]
    gaps = [draw(st.lists(st.sampled_from(alphabet), max_size=max_inserts)) for _ in range(len(kept) + 1)]
    target, mapping = [], [None] * len(source)
    for slot, i in enumerate(kept):
        target.extend(gaps[slot])
        mapping[i] = len(target)
        target.append(source[i])
    target.extend(gaps[-1])
    return Patch(source, File(tuple(target)), tuple(mapping))


@st.composite
def patches(draw, max_size: int = 6, alphabet: str = "ab"):
    return draw(patches_from(draw(files(max_size, alphabet)), alphabet=alphabet))


@st.composite
def composable(draw, count: int = 2, max_size: int = 6):
    first = draw(patches(max_size))
    out = [first]
    for _ in range(count - 1):
        out.append(draw(patches_from(out[-1].target)))
    return out


@st.composite
def objects(draw, max_vertices: int = 4, alphabet: str = "ab", sparse_ids: bool = False):
    n = draw(st.integers(0, max_vertices))
    if sparse_ids:
        ids = draw(st.lists(st.integers(0, 50), min_size=n, max_size=n, unique=True))
    else:
        ids = list(range(n))
    labels = {v: draw(st.sampled_from(alphabet)) for v in ids}
    pairs = [(x, y) for x in ids for y in ids]
    rel = draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))) if pairs else []
    return conflict_file(labels, rel)


@st.composite
def morphisms(draw, max_vertices: int = 3, source: ConflictFile | None = None):
    a = source if source is not None else draw(objects(max_vertices))
    b = draw(objects(max_vertices))
    return draw(st.sampled_from(list(hom(a, b))))


@st.composite
def composable_morphisms(draw, max_vertices: int = 3):
    f = draw(morphisms(max_vertices))
    g = draw(morphisms(max_vertices, source=f.target))
    return f, g
