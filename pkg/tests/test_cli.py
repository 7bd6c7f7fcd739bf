import os
import signal
import subprocess
import sys
import time

import pytest

from copatch import store as store_module
from copatch.conflict import is_linear
from copatch.store import Store
from cli_helpers import Tree, chars

DIAMOND = b"a\n<<<<<<<\nc\n=======\nd\n>>>>>>>\nb\n"


@pytest.fixture
def tree(tmp_path):
    t = Tree(tmp_path / "a")
    assert t.run("init").code == 0
    return t


def two_clones(tmp_path, left, right):
    a = Tree(tmp_path / "a")
    a.run("init")
    assert a.commit(chars("ab")).code == 0
    b = a.clone(tmp_path / "b")
    assert a.commit(chars(left)).code == 0
    assert b.commit(chars(right)).code == 0
    return a, b


class TestBasics:
    def test_record_and_state(self, tree):
        tree.write("a\nb\n")
        r = tree.run("record", "-m", "first")
        assert r.code == 0 and len(r.out.strip()) == 64
        s = tree.run("state")
        assert (s.code, s.out) == (0, b"a\nb\n")

    def test_empty_state(self, tree):
        assert tree.run("state").out == b""

    def test_init_twice(self, tree):
        r = tree.run("init")
        assert r.code == 1 and r.err.startswith(b"error:")

    def test_not_a_repository(self, tmp_path):
        r = Tree(tmp_path / "nothing").run("state")
        assert r.code == 1 and r.err.startswith(b"error:")

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["merge"], ["record", "--bogus"]])
    def test_usage(self, tree, argv):
        r = tree.run(*argv)
        assert r.code == 2 and r.err.startswith(b"error:")

    def test_missing_working_file(self, tree):
        r = tree.run("record")
        assert r.code == 1 and b"does not exist" in r.err

    def test_no_change(self, tree):
        tree.commit("a\n")
        r = tree.run("record")
        assert r.code == 1 and b"NoChange" in r.err

    def test_record_then_checkout_restores_bytes(self, tree):
        for text in ["a\nb\n", "x\ny\nx\n", "caf\xe9 %41\n\n\n", "a\rb\n", ""]:
            data = text.encode("utf-8")
            assert tree.commit(data).code == 0
            tree.write("junk\n")
            assert tree.run("checkout").code == 0
            assert tree.read() == data

    def test_env_filename(self, tmp_path):
        t = Tree(tmp_path / "w", filename="notes.txt")
        t.run("init")
        t.commit("n\n")
        assert (tmp_path / "w" / "notes.txt").exists()
        assert t.run("state").out == b"n\n"

    def test_log(self, tree):
        e1 = tree.commit("a\n", "one").out.strip().decode()
        e2 = tree.commit("a\nb\n", "two\nlines").out.strip().decode()
        out = tree.run("log").out.decode()
        assert out == f"event {e1}\nmessage one\n\nevent {e2}\ncause {e1}\nmessage two lines\n\n"

    def test_check_clean(self, tree):
        tree.commit("a\n")
        r = tree.run("check")
        assert (r.code, r.out) == (0, b"")


class TestMerge:
    def test_no_conflict_both_directions(self, tmp_path):
        a, b = two_clones(tmp_path, "accb", "abcd")
        ab = a.run("merge", str(b.path))
        ba = b.run("merge", str(a.path))
        assert ab.code == ba.code == 0
        assert ab.out == ba.out == b"a\nc\nc\nb\nc\nd\n"
        assert a.run("checkout").code == 0 and a.read() == b"a\nc\nc\nb\nc\nd\n"

    def test_conflict_and_resolve(self, tmp_path):
        a, b = two_clones(tmp_path, "acb", "adb")
        r = a.run("merge", str(b.path))
        assert (r.code, r.out) == (1, DIAMOND)
        assert b.run("merge", str(a.path)).out == DIAMOND
        assert a.run("state").code == 1
        assert a.commit(chars("acdb")).code == 1
        assert a.run("checkout").code == 1
        assert a.read() == chars("acdb")  # refused checkout leaves the file alone
        assert a.run("checkout", "--markers").code == 1
        assert a.read() == DIAMOND
        a.write(chars("acdb"))
        assert a.run("resolve", "-m", "keep both").code == 0
        s = a.run("state")
        assert (s.code, s.out) == (0, chars("acdb"))
        # the other clone picks up the resolution
        back = b.run("merge", str(a.path))
        assert (back.code, back.out) == (0, chars("acdb"))

    def test_merge_relative_path(self, tmp_path):
        a, b = two_clones(tmp_path, "accb", "abcd")
        assert a.run("merge", "../b").code == 0

    def test_merge_carries_messages(self, tmp_path):
        a, b = two_clones(tmp_path, "accb", "abcd")
        b.commit(chars("abcde"), "from b")
        a.run("merge", str(b.path))
        assert b"message from b" in a.run("log").out

    def test_merge_missing(self, tree, tmp_path):
        assert tree.run("merge", str(tmp_path / "absent")).code == 1

    def test_merge_idempotent(self, tmp_path):
        a, b = two_clones(tmp_path, "accb", "abcd")
        first = a.run("merge", str(b.path)).out
        assert a.run("merge", str(b.path)).out == first
        assert a.run("merge", str(a.path)).out == first


class TestCorruption:
    def test_tampered_event(self, tree):
        eid = tree.commit("a\n").out.strip().decode()
        path = tree.path / ".copatch" / "events" / eid
        path.write_bytes(path.read_bytes() + b"x")
        for cmd in ["state", "log", "check", "record"]:
            r = tree.run(cmd)
            assert r.code == 3 and r.err.startswith(b"error:"), cmd

    def test_missing_event(self, tree):
        eid = tree.commit("a\n").out.strip().decode()
        (tree.path / ".copatch" / "events" / eid).unlink()
        assert tree.run("state").code == 3

    def test_bad_heads(self, tree):
        (tree.path / ".copatch" / "heads").write_bytes(b"zzz\n")
        assert tree.run("state").code == 3

    def test_forged_base(self, tree):
        from copatch.conflict import embed_patch
        from copatch.lines import File, diff
        from copatch.render import encode_morphism
        from copatch.repository import Event

        eid = tree.commit("a\nb\n").out.strip().decode()
        ev = Event.create([eid], encode_morphism(embed_patch(diff(File.of("b", "a"), File.of("b")))))
        (tree.path / ".copatch" / "events" / ev.id).write_bytes(ev.encode())
        (tree.path / ".copatch" / "heads").write_bytes(ev.id.encode() + b"\n")
        assert tree.run("state").code == 3
        assert tree.run("check").code == 1


def snapshot(tree):
    """The state the store currently publishes, or an exception type name."""
    repo = Store(tree.path).load()
    return is_linear(repo.repo_state()).to_bytes()


class TestCrashSafety:
    def test_every_write_point(self, tree, monkeypatch):
        tree.commit("a\nb\n")
        old = snapshot(tree)
        real = store_module.atomic_write
        calls = []

        def counting(path, data):
            calls.append(path)
            real(path, data)

        monkeypatch.setattr(store_module, "atomic_write", counting)
        tree.write("a\nx\nb\n")
        assert tree.run("record").code == 0
        total = len(calls)
        assert total >= 2
        new = snapshot(tree)

        for crash_at in range(total + 1):
            t = Tree(tree.path.parent / f"crash{crash_at}")
            t.run("init")
            t.commit("a\nb\n")
            seen = []

            def crashing(path, data, crash_at=crash_at):
                if len(seen) == crash_at:
                    path.with_name("." + path.name + ".partial").write_bytes(data[: len(data) // 2])
                    raise KeyboardInterrupt
                seen.append(path)
                real(path, data)

            monkeypatch.setattr(store_module, "atomic_write", crashing)
            t.write("a\nx\nb\n")
            if crash_at < total:
                with pytest.raises(KeyboardInterrupt):
                    t.run("record")
            else:
                t.run("record")
            monkeypatch.setattr(store_module, "atomic_write", real)
            got = snapshot(t)
            assert got in (old, new)
            assert got == (new if crash_at >= total else old)
            assert t.run("check").code == 0

    def test_sigkill(self, tree):
        tree.commit("0\n")
        script = (
            "import sys\n"
            "from copatch.cli import main\n"
            "from pathlib import Path\n"
            "for i in range(1, 10**6):\n"
            "    Path(sys.argv[1], 'FILE').write_text(''.join(f'{k}\\n' for k in range(i + 1)))\n"
            "    main(['record'], cwd=sys.argv[1])\n"
        )
        env = dict(os.environ)
        counts = []
        for delay in (0.3, 0.6, 0.9, 1.2, 1.5):
            proc = subprocess.Popen(
                [sys.executable, "-c", script, str(tree.path)],
                env=env,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
            )
            time.sleep(delay)
            proc.send_signal(signal.SIGKILL)
            proc.wait()
            state = snapshot(tree)
            n = state.count(b"\n")
            assert state == "".join(f"{k}\n" for k in range(n)).encode()
            counts.append(n)
            assert tree.run("check").code == 0
        assert min(counts) > 1, counts

    def test_concurrent_writers_serialise(self, tree):
        tree.commit("base\n")
        env = dict(os.environ)
        procs = []
        for k in range(3):
            script = (
                "import sys\n"
                "from copatch.cli import main\n"
                "from pathlib import Path\n"
                f"name = 'F{k}'\n"
                "root = Path(sys.argv[1])\n"
                "(root / name).write_text('base\\nline%d\\n' % " + str(k) + ")\n"
                "sys.exit(main(['record'], cwd=root, environ={'COPATCH_FILE': name}))\n"
            )
            procs.append(subprocess.Popen([sys.executable, "-c", script, str(tree.path)], env=env))
        assert [p.wait() for p in procs] == [0, 0, 0]
        heads = Store(tree.path).read_heads()
        assert len(heads) == 1
        assert len(Store(tree.path).load().events) == 4
