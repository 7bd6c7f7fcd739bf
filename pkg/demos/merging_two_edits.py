"""Two people edit the same file; merge their patches with a pushout.

Run with ``python3 demos/merging_two_edits.py``.
"""

from copatch import File, diff, embed, embed_patch, is_linear, mediating, pushout, render_conflicts
from copatch.conflict import PartialMorphism

# A patch remembers which lines survive and where they land.
base = File.from_chars("ab")
alice = File.from_chars("accb")
bob = File.from_chars("abcd")

p_alice = diff(base, alice)
p_bob = diff(base, bob)
print("alice keeps", p_alice.as_dict(), " bob keeps", p_bob.as_dict())

# Edits in different places merge into an ordinary file.
merged = pushout(embed_patch(p_alice), embed_patch(p_bob))
print("merged file:", b"".join(is_linear(merged.apex).lines).decode())

# Both insert between a and b: the merge keeps c and d unordered.
left, right = diff(base, File.from_chars("acb")), diff(base, File.from_chars("adb"))
conflict = pushout(embed_patch(left), embed_patch(right))
print(render_conflicts(conflict.apex).decode(), end="")

# Resolving is choosing a file plus how each side maps into it.
chosen = embed(File.from_chars("acdb"))
h = PartialMorphism(conflict.leg_b.source, chosen, {0: 0, 1: 1, 2: 3})
k = PartialMorphism(conflict.leg_c.source, chosen, {0: 0, 1: 2, 2: 3})
resolution = mediating(conflict, h, k)
print("resolution map from the conflict file:", dict(resolution.mapping))
