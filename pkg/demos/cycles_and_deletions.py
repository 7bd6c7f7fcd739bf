"""Opposite orderings produce cycles; deletions make merge order visible.

Run with ``python3 demos/cycles_and_deletions.py``.
"""

from copatch import File, Repository, conflict_file, coproduct, mediating, pushout, render_conflicts
from copatch.conflict import PartialMorphism, embed_patch, is_isomorphic
from copatch.lines import diff

# Two independent lines, ordered one way by one user and the other way by another.
a, b = conflict_file({0: "a"}), conflict_file({0: "b"})
both = coproduct(a, b)
up = conflict_file({0: "a", 1: "b"}, [(0, 1)])
down = conflict_file({0: "a", 1: "b"}, [(1, 0)])
seq = mediating(both, PartialMorphism(a, up, {0: 0}), PartialMorphism(b, up, {0: 1}))
seq2 = mediating(both, PartialMorphism(a, down, {0: 0}), PartialMorphism(b, down, {0: 1}))
print(render_conflicts(pushout(seq, seq2).apex).decode(), end="")

# A deletion on one side removes the line; insertions elsewhere survive.
f = File.from_chars
gone = pushout(embed_patch(diff(f("abc"), f("adbc"))), embed_patch(diff(f("abc"), f("ac"))))
print("delete b, insert d:", render_conflicts(gone.apex).decode().split())

# With a deletion among concurrent edits, the merge order can change the result.
origin = Repository()
root = origin.record(f("b"))
r = origin
events = []
for text in ["c", "ab", "bz"]:
    fork = Repository(origin.events.values())
    events.append(fork.record(f(text)))
    r = r.import_repository(fork)
drop, before, after = events
late = r.state_along([root, before, after, drop])
early = r.state_along([root, drop, before, after])
print("deletion merged last:")
print(render_conflicts(late).decode(), end="")
print("deletion merged first:")
print(render_conflicts(early).decode(), end="")
print("same up to renaming:", is_isomorphic(late, early) is not None)
