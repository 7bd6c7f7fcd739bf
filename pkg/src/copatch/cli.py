"""``copatch`` command line: a single tracked file per working tree.

Exit codes: 0 success / linear state, 1 conflicted state or refused
operation, 2 usage error, 3 store corruption.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import BinaryIO, Mapping, Sequence

from . import __version__
from .conflict import is_linear
from .errors import (
    BaseMismatch,
    CopatchError,
    DigestMismatch,
    ParseError,
    StoreError,
    ValidationError,
)
from .lines import File
from .render import render_conflicts
from .repository import validate_es
from .store import Store, atomic_write

DEFAULT_FILE = "FILE"


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="copatch", description="Merge histories of one text file by pushouts.")
    p.add_argument("--version", action="version", version=f"copatch {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("init", help="create an empty repository here")
    rec = sub.add_parser("record", help="record the working file as a new event")
    rec.add_argument("-m", "--message", default="")
    sub.add_parser("state", help="print the repository state")
    co = sub.add_parser("checkout", help="write the state to the working file")
    co.add_argument("--markers", action="store_true", help="write conflict markers if conflicted")
    mg = sub.add_parser("merge", help="import the events of another repository")
    mg.add_argument("path")
    rs = sub.add_parser("resolve", help="record the working file above all heads")
    rs.add_argument("-m", "--message", default="")
    sub.add_parser("log", help="list events in causal order")
    sub.add_parser("check", help="validate the store")
    return p


class _Session:
    def __init__(self, cwd: Path, environ: Mapping[str, str], out: BinaryIO, err: BinaryIO):
        self.cwd = cwd
        self.out = out
        self.err = err
        self.store = Store(cwd)
        self.work = cwd / environ.get("COPATCH_FILE", DEFAULT_FILE)

    def say(self, data: bytes | str):
        self.out.write(data.encode("utf-8") if isinstance(data, str) else data)

    def read_work(self) -> File:
        try:
            return File.from_bytes(self.work.read_bytes())
        except FileNotFoundError:
            raise CopatchError(f"working file {self.work.name} does not exist") from None

    def show_state(self, repo) -> int:
        x = repo.repo_state()
        self.say(render_conflicts(x))
        return 0 if is_linear(x) is not None else 1

    def init(self, args) -> int:
        Store.init(self.cwd)
        return 0

    def record(self, args) -> int:
        with self.store.lock():
            repo = self.store.load()
            eid = repo.record(self.read_work())
            self.store.save(repo, {eid: args.message})
        self.say(eid + "\n")
        return 0

    def resolve(self, args) -> int:
        with self.store.lock():
            repo = self.store.load()
            eid = repo.resolve(self.read_work())
            self.store.save(repo, {eid: args.message})
        self.say(eid + "\n")
        return 0

    def state(self, args) -> int:
        return self.show_state(self.store.load())

    def checkout(self, args) -> int:
        with self.store.lock():
            x = self.store.load().repo_state()
            plain = is_linear(x)
            if plain is not None:
                atomic_write(self.work, plain.to_bytes())
                return 0
            if not args.markers:
                raise CopatchError("state is conflicted; use --markers to write conflict markers")
            atomic_write(self.work, render_conflicts(x))
            return 1

    def merge(self, args) -> int:
        other_root = Path(args.path)
        if not other_root.is_absolute():
            other_root = self.cwd / other_root
        other = Store(other_root).load()
        with self.store.lock():
            repo = self.store.load().import_repository(other)
            messages = {e: Store(other_root).message(e) for e in other.events}
            self.store.save(repo, {e: m for e, m in messages.items() if m and not self.store.message(e)})
        return self.show_state(repo)

    def log(self, args) -> int:
        repo = self.store.load()
        for e in repo.topological():
            self.say(f"event {e}\n")
            for c in sorted(repo.events[e].causes):
                self.say(f"cause {c}\n")
            msg = self.store.message(e)
            if msg:
                self.say("message " + msg.replace("\n", " ") + "\n")
            self.say("\n")
        return 0

    def check(self, args) -> int:
        repo = self.store.load()
        problems = [str(v.message) for v in validate_es(repo.es).violations]
        if not problems:
            problems = [v.message for v in repo.check().violations]
        heads = sorted(self.store.read_heads())
        if heads != sorted(repo.maximal()):
            problems.append("heads file does not list exactly the maximal events")
        for p in problems:
            self.say(f"problem: {p}\n")
        return 0 if not problems else 1


def main(
    argv: Sequence[str] | None = None,
    cwd: str | os.PathLike | None = None,
    environ: Mapping[str, str] | None = None,
    stdout: BinaryIO | None = None,
    stderr: BinaryIO | None = None,
) -> int:
    out = stdout if stdout is not None else sys.stdout.buffer
    err = stderr if stderr is not None else sys.stderr.buffer
    try:
        args = _parser().parse_args(list(sys.argv[1:] if argv is None else argv))
    except _Usage as exc:
        err.write(f"error: usage: {exc}\n".encode("utf-8"))
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    session = _Session(
        Path(cwd) if cwd is not None else Path.cwd(),
        os.environ if environ is None else environ,
        out,
        err,
    )
    try:
        return getattr(session, args.command)(args)
    except (StoreError, ParseError, DigestMismatch, BaseMismatch, ValidationError) as exc:
        err.write(f"error: corrupt store: {exc}\n".encode("utf-8"))
        return 3
    except CopatchError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n".encode("utf-8"))
        return 1
    finally:
        out.flush()


if __name__ == "__main__":
    sys.exit(main())
