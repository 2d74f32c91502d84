import io
import json
import os
import subprocess
import sys
import time
from pathlib import Path

import pytest

from sandbox_runner import ExecRequest, ExecResult, Runner, SpawnError, serve

SRC_DIR = Path(__file__).resolve().parents[1] / "src"


@pytest.fixture
def workdir(tmp_path):
    wd = tmp_path / "work"
    wd.mkdir()
    return wd


def run_code(code, workdir, **kwargs):
    return Runner().execute(ExecRequest(code=code, workdir=str(workdir), **kwargs))


class TestExecute:
    def test_prints_division_result(self, workdir):
        result = run_code("print(50000/200)", workdir)
        assert result.exit_code == 0
        assert result.stdout == "250.0\n"
        assert result.stderr == ""
        assert result.timed_out is False
        assert result.artifacts == []
        assert result.wall_ms >= 0

    def test_captures_multiline_and_non_ascii_output(self, workdir):
        result = run_code('print("alpha \\u03b1\\nbeta \\u00df")\nprint("\\u4e2d\\u6587")', workdir)
        assert result.exit_code == 0
        assert result.stdout == "alpha \u03b1\nbeta \u00df\n\u4e2d\u6587\n"

    def test_captures_stderr_and_exit_code(self, workdir):
        result = run_code('import sys\nsys.stderr.write("boom\\n")\nsys.exit(3)', workdir)
        assert result.exit_code == 3
        assert result.stderr == "boom\n"
        assert result.timed_out is False

    def test_infinite_loop_is_killed_at_timeout(self, workdir):
        start = time.monotonic()
        result = run_code("while True: pass", workdir, timeout_s=1)
        elapsed = time.monotonic() - start
        assert result.timed_out is True
        assert result.exit_code != 0
        assert result.wall_ms >= 1000
        # the run must end within the timeout plus a small grace window
        assert elapsed < 3.0

    def test_timeout_keeps_output_emitted_before_the_kill(self, workdir):
        code = 'import sys\nprint("early")\nsys.stdout.flush()\nwhile True: pass'
        result = run_code(code, workdir, timeout_s=1)
        assert result.timed_out is True
        assert "early" in result.stdout

    def test_created_file_is_reported_as_artifact(self, workdir):
        (workdir / "existing.txt").write_text("old")
        result = run_code(
            'open("chart.png", "wb").write(b"\\x89PNG fake")', workdir)
        assert result.exit_code == 0
        assert result.artifacts == ["chart.png"]

    def test_modified_file_is_reported_as_artifact(self, workdir):
        (workdir / "log.txt").write_text("start\n")
        result = run_code('open("log.txt", "a").write("more\\n")', workdir)
        assert result.artifacts == ["log.txt"]

    def test_artifact_in_subdirectory_uses_relative_path(self, workdir):
        code = ('import os\nos.makedirs("out", exist_ok=True)\n'
                'open("out/table.csv", "w").write("a,b\\n")')
        result = run_code(code, workdir)
        assert result.artifacts == ["out/table.csv"]

    def test_code_runs_with_workdir_as_cwd(self, workdir):
        result = run_code("import os\nprint(os.getcwd())", workdir)
        assert result.stdout.strip() == str(workdir.resolve())

    def test_files_outside_workdir_stay_untouched(self, tmp_path, workdir):
        tripwire = tmp_path / "tripwire.txt"
        tripwire.write_text("untouched")
        before = tripwire.stat().st_mtime_ns
        outside = sorted(p.name for p in tmp_path.iterdir())
        run_code('open("inside.txt", "w").write("ok")', workdir)
        assert tripwire.read_text() == "untouched"
        assert tripwire.stat().st_mtime_ns == before
        assert sorted(p.name for p in tmp_path.iterdir()) == outside

    def test_network_access_is_denied_by_default(self, workdir):
        result = run_code("import socket\nsocket.socket()", workdir)
        assert result.exit_code != 0
        assert "network access is disabled" in result.stderr

    def test_network_can_be_explicitly_allowed(self, workdir):
        runner = Runner(allow_network=True)
        result = runner.execute(ExecRequest(
            code="import socket\ns = socket.socket()\ns.close()\nprint('ok')",
            workdir=str(workdir)))
        assert result.exit_code == 0
        assert result.stdout == "ok\n"

    def test_memory_cap_stops_oversized_allocation(self, workdir):
        result = run_code("b = bytearray(1 << 30)\nprint(len(b))", workdir,
                          mem_limit_mb=256)
        assert result.exit_code != 0
        assert "MemoryError" in result.stderr

    def test_allocation_under_the_cap_succeeds(self, workdir):
        result = run_code("b = bytearray(8 << 20)\nprint(len(b))", workdir,
                          mem_limit_mb=256)
        assert result.exit_code == 0
        assert result.stdout == str(8 << 20) + "\n"

    def test_missing_workdir_is_rejected(self, tmp_path):
        runner = Runner()
        with pytest.raises(ValueError, match="workdir does not exist"):
            runner.execute(ExecRequest(code="print(1)",
                                       workdir=str(tmp_path / "nope")))

    def test_unspawnable_interpreter_raises(self, workdir):
        runner = Runner(python_cmd=["/nonexistent/python3"])
        with pytest.raises(SpawnError, match="cannot start interpreter"):
            runner.execute(ExecRequest(code="print(1)", workdir=str(workdir)))


class TestRequestValidation:
    def base(self, workdir):
        return {"code": "print(1)", "workdir": str(workdir)}

    def test_defaults_applied(self, workdir):
        req = ExecRequest.from_wire(self.base(workdir))
        assert req.timeout_s == 30
        assert req.mem_limit_mb == 512

    @pytest.mark.parametrize("patch", [
        {"code": None},
        {"code": ""},
        {"code": "   "},
        {"workdir": None},
        {"workdir": ""},
        {"timeout_s": 0},
        {"timeout_s": -1},
        {"timeout_s": True},
        {"timeout_s": "30"},
        {"mem_limit_mb": 0},
        {"mem_limit_mb": False},
    ])
    def test_bad_fields_rejected(self, workdir, patch):
        raw = {**self.base(workdir), **patch}
        with pytest.raises(ValueError):
            ExecRequest.from_wire(raw)

    def test_non_object_rejected(self):
        with pytest.raises(ValueError, match="JSON object"):
            ExecRequest.from_wire(["not", "a", "dict"])


class TestWireProtocol:
    def test_result_round_trips_through_json(self):
        result = ExecResult(exit_code=0, stdout="hi\n", stderr="", wall_ms=12,
                            artifacts=["a.png"], timed_out=False)
        wire = json.loads(json.dumps(result.to_wire()))
        assert wire == {"exit_code": 0, "stdout": "hi\n", "stderr": "",
                        "wall_ms": 12, "artifacts": ["a.png"],
                        "timed_out": False}

    def serve_lines(self, lines):
        out = io.StringIO()
        serve(io.StringIO("".join(line + "\n" for line in lines)), out)
        return [json.loads(line) for line in out.getvalue().splitlines()]

    def test_serves_requests_in_order(self, workdir):
        replies = self.serve_lines([
            json.dumps({"code": "print('one')", "workdir": str(workdir)}),
            json.dumps({"code": "print('two')", "workdir": str(workdir)}),
        ])
        assert [r["stdout"] for r in replies] == ["one\n", "two\n"]
        assert all(r["exit_code"] == 0 for r in replies)

    def test_malformed_line_yields_error_and_loop_survives(self, workdir):
        replies = self.serve_lines([
            "this is not json",
            json.dumps({"code": "print('after')", "workdir": str(workdir)}),
        ])
        assert len(replies) == 2
        assert replies[0]["exit_code"] == -1
        assert "bad request" in replies[0]["stderr"]
        assert replies[1]["stdout"] == "after\n"

    def test_invalid_request_yields_error_line(self, workdir):
        replies = self.serve_lines([
            json.dumps({"code": "", "workdir": str(workdir)}),
            json.dumps({"code": "print(1)", "workdir": str(workdir / "missing")}),
        ])
        assert [r["exit_code"] for r in replies] == [-1, -1]
        assert "code string" in replies[0]["stderr"]
        assert "workdir does not exist" in replies[1]["stderr"]

    def test_blank_lines_are_skipped(self, workdir):
        replies = self.serve_lines([
            "",
            json.dumps({"code": "print('x')", "workdir": str(workdir)}),
            "   ",
        ])
        assert len(replies) == 1
        assert replies[0]["stdout"] == "x\n"


class TestModuleEntryPoint:
    def test_python_dash_m_serves_one_request(self, tmp_path, workdir):
        # resolve the package from src directly so the test does not depend
        # on an installed copy
        env = os.environ.copy()
        env["PYTHONPATH"] = str(SRC_DIR)
        proc = subprocess.Popen(
            [sys.executable, "-m", "sandbox_runner"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, text=True, cwd=str(tmp_path), env=env)
        request = json.dumps({"code": "print(50000/200)",
                              "workdir": str(workdir)})
        out, err = proc.communicate(request + "\n", timeout=60)
        assert proc.returncode == 0, err
        reply = json.loads(out.splitlines()[0])
        assert reply["stdout"] == "250.0\n"
        assert reply["exit_code"] == 0
        assert reply["timed_out"] is False
