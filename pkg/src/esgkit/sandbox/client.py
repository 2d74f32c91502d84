"""Client for the external sandbox runner process.

The runner is a separate package (sandbox_runner) talking JSONL over
stdin/stdout: one request line in, one result line out. The client spawns
it lazily, keeps it alive across calls, and enforces a grace deadline on
top of the runner's own timeout so a crashed runner cannot hang the run.
"""

from __future__ import annotations

import importlib.util
import json
import select
import shutil
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import SandboxTimeout, SandboxUnavailable

GRACE_S = 15.0


@dataclass
class ExecOutcome:
    exit_code: int
    stdout: str
    stderr: str
    wall_ms: int
    artifacts: list[str] = field(default_factory=list)
    timed_out: bool = False


class SandboxClient:
    def __init__(self, cmd: list[str] | None = None, *,
                 default_timeout_s: int = 30, mem_limit_mb: int = 512):
        self._custom_cmd = cmd is not None
        self.cmd = cmd or [sys.executable, "-m", "sandbox_runner"]
        self.default_timeout_s = default_timeout_s
        self.mem_limit_mb = mem_limit_mb
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def is_available(self) -> bool:
        if self._custom_cmd:
            head = self.cmd[0]
            return bool(shutil.which(head)) or Path(head).exists()
        # probe the runnable entry point: a bare directory on sys.path can
        # masquerade as an empty namespace package
        try:
            return importlib.util.find_spec("sandbox_runner.__main__") is not None
        except ModuleNotFoundError:
            return False

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            if not self.is_available():
                raise SandboxUnavailable(
                    "sandbox runner is not installed; install the "
                    "sandbox_runner package to enable code execution"
                )
            try:
                self._proc = subprocess.Popen(
                    self.cmd,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise SandboxUnavailable(f"cannot spawn sandbox runner: {exc}")
        return self._proc

    def execute(self, code: str, workdir: str | Path,
                timeout_s: int | None = None,
                mem_limit_mb: int | None = None) -> ExecOutcome:
        timeout_s = timeout_s or self.default_timeout_s
        workdir = Path(workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        request = json.dumps({
            "code": code,
            "timeout_s": timeout_s,
            "mem_limit_mb": mem_limit_mb or self.mem_limit_mb,
            "workdir": str(workdir),
        })
        with self._lock:
            proc = self._ensure_proc()
            try:
                proc.stdin.write(request + "\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                self._kill()
                raise SandboxUnavailable(f"sandbox runner died: {exc}")
            line = self._read_line(proc, timeout_s + GRACE_S)
        raw = json.loads(line)
        return ExecOutcome(
            exit_code=int(raw.get("exit_code", -1)),
            stdout=str(raw.get("stdout", "")),
            stderr=str(raw.get("stderr", "")),
            wall_ms=int(raw.get("wall_ms", 0)),
            artifacts=[str(a) for a in raw.get("artifacts", [])],
            timed_out=bool(raw.get("timed_out", False)),
        )

    def _read_line(self, proc: subprocess.Popen, deadline_s: float) -> str:
        fd = proc.stdout.fileno()
        ready, _, _ = select.select([fd], [], [], deadline_s)
        if not ready:
            self._kill()
            raise SandboxTimeout(
                f"sandbox runner gave no response within {deadline_s:.0f}s"
            )
        line = proc.stdout.readline()
        if not line:
            self._kill()
            raise SandboxUnavailable("sandbox runner closed its output")
        return line

    def _kill(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
            except OSError:
                pass
            self._proc = None

    def close(self) -> None:
        with self._lock:
            if self._proc is not None and self._proc.poll() is None:
                try:
                    self._proc.stdin.close()
                    self._proc.wait(timeout=2)
                except (OSError, subprocess.TimeoutExpired):
                    self._kill()
            self._proc = None

    def __enter__(self) -> "SandboxClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
