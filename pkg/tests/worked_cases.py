"""The worked merges used across the test suite."""

from copatch.conflict import (
    PartialMorphism,
    conflict_file,
    coproduct,
    embed,
    embed_patch,
    mediating,
)
from copatch.lines import File, diff, make_patch

F = File.from_chars


def no_conflict_span():
    f1 = make_patch(F("ab"), F("accb"), {0: 0, 1: 3})
    f2 = make_patch(F("ab"), F("abcd"), {0: 0, 1: 1})
    return f1, f2


def no_pushout_span():
    return diff(F("ab"), F("acb")), diff(F("ab"), F("adb"))


def diamond():
    """a < {c, d} < b with c and d incomparable."""
    return conflict_file({0: "a", 1: "c", 2: "d", 3: "b"}, [(0, 1), (0, 2), (1, 3), (2, 3)])


def five_vertex_span():
    f1 = make_patch(F("ab"), File.of("a'", "a", "c", "b"), {0: 1, 1: 3})
    f2 = make_patch(F("ab"), F("adb"), {0: 0, 1: 2})
    return f1, f2


def five_vertex():
    return conflict_file(
        {0: "a'", 1: "a", 2: "c", 3: "d", 4: "b"},
        [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)],
    )


def deletion_span():
    f1 = make_patch(F("abc"), F("adbc"), {0: 0, 1: 2, 2: 3})
    f2 = make_patch(F("abc"), F("ac"), {0: 0, 2: 1})
    return f1, f2


def seq_pair(first="a", second="b"):
    """The two sequentialisations of two independent lines, as a span."""
    one_a = conflict_file({0: first})
    one_b = conflict_file({0: second})
    co = coproduct(one_a, one_b)
    up = conflict_file({0: first, 1: second}, [(0, 1)])
    down = conflict_file({0: first, 1: second}, [(1, 0)])
    seq = mediating(co, PartialMorphism(one_a, up, {0: 0}), PartialMorphism(one_b, up, {0: 1}))
    seq2 = mediating(co, PartialMorphism(one_a, down, {0: 0}), PartialMorphism(one_b, down, {0: 1}))
    return seq, seq2


def cycle_with_loops(first="a", second="b"):
    return conflict_file({0: first, 1: second}, [(0, 1), (1, 0)])
