"""bash tool: jailed shell execution inside the run directory."""

from __future__ import annotations

import os
import shlex
import subprocess

from ..errors import ArgValidation, ExecutionError, JailViolation, SandboxTimeout
from .context import RunContext
from .registry import ToolCall, ToolResult

DEFAULT_TIMEOUT_S = 30


def check_jail(command: str, run_dir) -> None:
    """Reject commands that reference absolute paths outside the run
    directory. The scan is a pre-execution tripwire, not a sandbox; the
    command still runs with cwd pinned to the run dir."""
    try:
        tokens = shlex.split(command)
    except ValueError:
        tokens = command.split()
    root = os.path.realpath(run_dir)
    for token in tokens:
        candidate = token
        # catch redirections and assignments like >/etc/out or X=/etc/passwd
        for sep in (">", "<", "="):
            if sep in candidate:
                candidate = candidate.split(sep)[-1]
        if candidate.startswith("/"):
            resolved = os.path.realpath(candidate)
            if resolved != root and not resolved.startswith(root + os.sep):
                raise JailViolation(
                    f"command references a path outside the run dir: {token}"
                )


def tool_bash(call: ToolCall, context: RunContext) -> ToolResult:
    command = call.args["command"]
    if not command.strip():
        raise ArgValidation("bash: command is empty")
    check_jail(command, context.run_dir)
    timeout_s = call.args.get("timeout_s") or DEFAULT_TIMEOUT_S
    try:
        proc = subprocess.run(
            ["/bin/bash", "-c", command],
            cwd=context.run_dir,
            capture_output=True,
            text=True,
            timeout=timeout_s,
        )
    except subprocess.TimeoutExpired:
        raise SandboxTimeout(f"command exceeded {timeout_s}s and was killed")
    if proc.returncode != 0:
        raise ExecutionError(
            f"command failed with exit code {proc.returncode}:\n"
            f"{proc.stderr.strip()[-500:]}",
            exit_code=proc.returncode,
        )
    summary = f"STDOUT:\n{proc.stdout}"
    if proc.stderr.strip():
        summary += f"\n\nSTDERR:\n{proc.stderr}"
    return ToolResult(ok=True, summary=summary,
                      data={"exit_code": proc.returncode})
