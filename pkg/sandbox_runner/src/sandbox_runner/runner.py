"""Executes untrusted generated Python in a fresh subprocess per request.

Each request carries the code, a working directory, a wall-clock timeout,
and an address-space cap. The code file itself lives in a scratch directory
outside the workdir so the before/after snapshot only reports files the
code actually created or modified. Socket creation is stubbed out via an
injected sitecustomize module unless networking is explicitly allowed.
"""

from __future__ import annotations

import json
import logging
import os
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

try:
    import resource
except ImportError:  # non-POSIX: cap is logged as unenforced
    resource = None  # type: ignore[assignment]

log = logging.getLogger("sandbox_runner")

DEFAULT_TIMEOUT_S = 30
DEFAULT_MEM_LIMIT_MB = 512

_NET_STUB = '''\
"""Injected at interpreter startup: refuses socket creation so the code stays offline."""
import socket


def _deny(*args, **kwargs):
    raise OSError("network access is disabled in the sandbox")


socket.socket = _deny
socket.socketpair = _deny
socket.create_connection = _deny
socket.getaddrinfo = _deny
'''


class SpawnError(RuntimeError):
    """The interpreter process could not be started."""


@dataclass
class ExecRequest:
    code: str
    workdir: str
    timeout_s: int = DEFAULT_TIMEOUT_S
    mem_limit_mb: int = DEFAULT_MEM_LIMIT_MB

    @classmethod
    def from_wire(cls, raw: object) -> "ExecRequest":
        """Validate one decoded request object from the wire."""
        if not isinstance(raw, dict):
            raise ValueError("request must be a JSON object")
        code = raw.get("code")
        if not isinstance(code, str) or not code.strip():
            raise ValueError("request needs a non-empty code string")
        workdir = raw.get("workdir")
        if not isinstance(workdir, str) or not workdir:
            raise ValueError("request needs a workdir path")
        timeout_s = raw.get("timeout_s", DEFAULT_TIMEOUT_S)
        mem_limit_mb = raw.get("mem_limit_mb", DEFAULT_MEM_LIMIT_MB)
        for name, value in (("timeout_s", timeout_s), ("mem_limit_mb", mem_limit_mb)):
            # bool is an int subtype but makes no sense as a limit
            if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a positive integer")
        return cls(code=code, workdir=workdir,
                   timeout_s=timeout_s, mem_limit_mb=mem_limit_mb)


@dataclass
class ExecResult:
    exit_code: int
    stdout: str
    stderr: str
    wall_ms: int
    artifacts: list[str] = field(default_factory=list)
    timed_out: bool = False

    def to_wire(self) -> dict:
        return {
            "exit_code": self.exit_code,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "wall_ms": self.wall_ms,
            "artifacts": list(self.artifacts),
            "timed_out": self.timed_out,
        }


def _snapshot(root: Path) -> dict[str, tuple[int, int]]:
    """Map every file under root to (size, mtime_ns), keyed by posix relpath."""
    seen: dict[str, tuple[int, int]] = {}
    for dirpath, _dirnames, filenames in os.walk(root):
        for name in filenames:
            full = Path(dirpath) / name
            try:
                st = full.stat()
            except OSError:  # deleted between walk and stat
                continue
            seen[full.relative_to(root).as_posix()] = (st.st_size, st.st_mtime_ns)
    return seen


def _kill_tree(proc: subprocess.Popen) -> None:
    # start_new_session puts the child in its own group, so the group id
    # is the child pid and grandchildren die with it
    if hasattr(os, "killpg"):
        try:
            os.killpg(proc.pid, signal.SIGKILL)
            return
        except OSError:
            pass
    proc.kill()


class Runner:
    """Runs one request at a time, each in a fresh interpreter process."""

    def __init__(self, *, python_cmd: list[str] | None = None,
                 allow_network: bool = False):
        self.python_cmd = list(python_cmd) if python_cmd else [sys.executable]
        self.allow_network = allow_network

    def execute(self, request: ExecRequest) -> ExecResult:
        workdir = Path(request.workdir)
        if not workdir.is_dir():
            raise ValueError(f"workdir does not exist: {workdir}")
        before = _snapshot(workdir)
        start = time.monotonic()
        with tempfile.TemporaryDirectory(prefix="sbxrun_") as scratch:
            code_path = Path(scratch) / "job.py"
            code_path.write_text(request.code, encoding="utf-8")
            env = self._child_env(scratch)
            proc = self._spawn(code_path, workdir, request.mem_limit_mb, env)
            timed_out = False
            try:
                out, err = proc.communicate(timeout=request.timeout_s)
            except subprocess.TimeoutExpired:
                timed_out = True
                _kill_tree(proc)
                out, err = proc.communicate()
        wall_ms = round((time.monotonic() - start) * 1000)
        after = _snapshot(workdir)
        artifacts = sorted(rel for rel, sig in after.items()
                           if before.get(rel) != sig)
        return ExecResult(
            exit_code=proc.returncode,
            stdout=out.decode("utf-8", errors="replace"),
            stderr=err.decode("utf-8", errors="replace"),
            wall_ms=wall_ms,
            artifacts=artifacts,
            timed_out=timed_out,
        )

    def _child_env(self, scratch: str) -> dict[str, str]:
        env = os.environ.copy()
        # pipes would otherwise fall back to the locale codec and choke
        # on non-ASCII prints under a C locale
        env["PYTHONIOENCODING"] = "utf-8"
        if not self.allow_network:
            stub = Path(scratch) / "sitecustomize.py"
            stub.write_text(_NET_STUB, encoding="utf-8")
            prior = env.get("PYTHONPATH")
            env["PYTHONPATH"] = scratch if not prior else scratch + os.pathsep + prior
        return env

    def _spawn(self, code_path: Path, workdir: Path,
               mem_limit_mb: int, env: dict[str, str]) -> subprocess.Popen:
        preexec = None
        if resource is not None:
            limit_bytes = mem_limit_mb * 1024 * 1024

            def preexec() -> None:
                resource.setrlimit(resource.RLIMIT_AS, (limit_bytes, limit_bytes))
                resource.setrlimit(resource.RLIMIT_CORE, (0, 0))
        else:
            log.warning("resource module unavailable; memory cap unenforced")
        try:
            return subprocess.Popen(
                [*self.python_cmd, str(code_path)],
                cwd=str(workdir),
                stdin=subprocess.DEVNULL,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                env=env,
                preexec_fn=preexec,
                start_new_session=True,
            )
        except OSError as exc:
            raise SpawnError(f"cannot start interpreter: {exc}") from exc


def _failure(message: str, start: float) -> ExecResult:
    return ExecResult(exit_code=-1, stdout="", stderr=message,
                      wall_ms=round((time.monotonic() - start) * 1000))


def _handle_line(runner: Runner, line: str) -> ExecResult:
    start = time.monotonic()
    try:
        request = ExecRequest.from_wire(json.loads(line))
    except (json.JSONDecodeError, ValueError) as exc:
        return _failure(f"bad request: {exc}", start)
    try:
        return runner.execute(request)
    except (SpawnError, ValueError, OSError) as exc:
        return _failure(str(exc), start)


def serve(stdin: IO[str] | None = None, stdout: IO[str] | None = None, *,
          runner: Runner | None = None) -> None:
    """Answer requests until stdin closes: one JSON line in, one JSON line out.

    Malformed or failing requests produce an error result line instead of
    killing the loop, so a long-lived runner survives bad input.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    active = runner if runner is not None else Runner()
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        result = _handle_line(active, line)
        stdout.write(json.dumps(result.to_wire()) + "\n")
        stdout.flush()
