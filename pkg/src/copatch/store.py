"""On-disk repository store under ``.copatch/``.

Layout::

    .copatch/events/<id>     cause lines, then the patch's morphism encoding
    .copatch/messages/<id>   free-form record message (optional)
    .copatch/conflicts       "<id> <id>" lines, only when non-empty
    .copatch/heads           maximal event ids, one per line
    .copatch/lock            flock target for writers

The repository is everything reachable from ``heads``.  Event files are
immutable and written before ``heads`` is atomically replaced, so a writer
killed at any point leaves either the old or the new repository.
"""

from __future__ import annotations

import contextlib
import fcntl
import hashlib
import os
import re
from pathlib import Path

from .errors import NotARepository, ParseError, StoreError
from .repository import Event, Repository

STORE_DIR = ".copatch"
_ID = re.compile(r"[0-9a-f]{64}\Z")


def atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


class Store:
    def __init__(self, root: str | os.PathLike):
        root = Path(root)
        self.path = root if root.name == STORE_DIR else root / STORE_DIR

    @classmethod
    def init(cls, root: str | os.PathLike) -> "Store":
        store = cls(root)
        if store.path.exists():
            raise NotARepository(f"{store.path} already exists")
        store.path.mkdir(parents=True)
        (store.path / "events").mkdir()
        (store.path / "messages").mkdir()
        atomic_write(store.path / "heads", b"")
        return store

    def exists(self) -> bool:
        return (self.path / "heads").is_file() and (self.path / "events").is_dir()

    def _require(self):
        if not self.exists():
            raise NotARepository(f"no repository at {self.path}")

    @contextlib.contextmanager
    def lock(self):
        self._require()
        with open(self.path / "lock", "a+b") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)

    def read_heads(self) -> list[str]:
        self._require()
        raw = (self.path / "heads").read_bytes().decode("ascii", "replace")
        heads = [line for line in raw.split("\n") if line]
        for h in heads:
            if not _ID.match(h):
                raise StoreError(f"malformed head {h!r}")
        if raw and not raw.endswith("\n"):
            raise StoreError("heads file is not LF-terminated")
        return heads

    def read_event(self, eid: str) -> Event:
        if not _ID.match(eid):
            raise StoreError(f"malformed event id {eid!r}")
        try:
            data = (self.path / "events" / eid).read_bytes()
        except FileNotFoundError:
            raise StoreError(f"missing event {eid}") from None
        if hashlib.sha256(data).hexdigest() != eid:
            raise StoreError(f"event {eid} does not match its content digest")
        try:
            ev = Event.decode(data)
        except ParseError as exc:
            raise StoreError(f"event {eid}: {exc}") from None
        assert ev.id == eid
        return ev

    def load(self) -> Repository:
        events = {}
        stack = list(self.read_heads())
        while stack:
            eid = stack.pop()
            if eid in events:
                continue
            ev = events[eid] = self.read_event(eid)
            stack.extend(ev.causes)
        conflicts = []
        cpath = self.path / "conflicts"
        if cpath.exists():
            for line in cpath.read_bytes().decode("ascii", "replace").split("\n"):
                if not line:
                    continue
                parts = line.split(" ")
                if len(parts) != 2 or not all(_ID.match(p) for p in parts):
                    raise StoreError(f"malformed conflict line {line!r}")
                if parts[0] in events and parts[1] in events:
                    conflicts.append(tuple(parts))
        return Repository(events.values(), conflicts)

    def message(self, eid: str) -> str:
        path = self.path / "messages" / eid
        return path.read_text("utf-8") if path.exists() else ""

    def save(self, repo: Repository, messages: dict[str, str] | None = None) -> None:
        """Write new events and messages, then publish them by replacing ``heads``."""
        self._require()
        for eid in repo.topological():
            path = self.path / "events" / eid
            if not path.exists():
                atomic_write(path, repo.events[eid].encode())
        for eid, msg in (messages or {}).items():
            atomic_write(self.path / "messages" / eid, msg.encode("utf-8"))
        if repo.conflicts:
            body = "".join(f"{a} {b}\n" for a, b in sorted(repo.conflicts))
            atomic_write(self.path / "conflicts", body.encode("ascii"))
        heads = "".join(f"{h}\n" for h in sorted(repo.maximal()))
        atomic_write(self.path / "heads", heads.encode("ascii"))
