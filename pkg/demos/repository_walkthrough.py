"""A repository is a set of events; its state merges all of them.

Run with ``python3 demos/repository_walkthrough.py``.
"""

from copatch import File, Repository, render_conflicts
from copatch.repository import EventStructure, configurations, hereditary_closure

F = File.from_chars

# Two clones share their first event.
origin = Repository()
origin.record(F("ab"))
mine = Repository(origin.events.values())
theirs = Repository(origin.events.values())
mine.record(F("acb"))
theirs.record(F("adb"))

# Importing is a union of events, so it does not matter who pulls.
merged = mine.import_repository(theirs)
assert merged == theirs.import_repository(mine)
print(render_conflicts(merged.repo_state()).decode(), end="")

# Recording on a conflicted state is refused; resolving sits above both heads.
merged.resolve(F("adcb"))
print("after resolve:", render_conflicts(merged.repo_state()).decode().split())

for e in merged.topological():
    causes = ", ".join(c[:8] for c in sorted(merged.events[e].causes)) or "-"
    print(f"  {e[:8]}  causes {causes}")

# Conflicts between events are inherited by everything built on them.
es = EventStructure.build(
    {"a": [], "b": ["a"], "c": ["a"], "c'": ["a"], "d": ["b", "c"]},
    [("c", "c'"), ("c'", "c")],
)
closed = hereditary_closure(es)
print("d conflicts with c':", ("d", "c'") in closed.conflicts)
for x in sorted(configurations(closed), key=lambda x: (len(x), sorted(x))):
    print("  {" + ", ".join(sorted(x)) + "}")
