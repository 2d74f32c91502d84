"""code_interpreter: run Python snippets in the external sandbox."""

from __future__ import annotations

from ..errors import ArgValidation, ExecutionError, SandboxTimeout, SandboxUnavailable
from .context import RunContext
from .registry import ToolCall, ToolResult


def run_code(code: str, context: RunContext, timeout_s: int | None = None):
    if context.sandbox is None or not context.sandbox.is_available():
        raise SandboxUnavailable("no sandbox runner is available")
    return context.sandbox.execute(code, workdir=context.run_dir,
                                   timeout_s=timeout_s)


def summarize_execution(outcome) -> str:
    summary = f"STDOUT:\n{outcome.stdout}"
    if outcome.stderr.strip():
        summary += f"\n\nSTDERR:\n{outcome.stderr}"
    return summary


def tool_code_interpreter(call: ToolCall, context: RunContext) -> ToolResult:
    code = call.args["code"]
    if not code.strip():
        raise ArgValidation("code_interpreter: code is empty")
    outcome = run_code(code, context, call.args.get("timeout_s"))
    if outcome.timed_out:
        raise SandboxTimeout(
            f"execution exceeded {outcome.wall_ms} ms and was killed"
        )
    if outcome.exit_code != 0:
        tail = outcome.stderr.strip().splitlines()[-5:]
        raise ExecutionError(
            "execution failed with exit code "
            f"{outcome.exit_code}:\n" + "\n".join(tail),
            exit_code=outcome.exit_code,
        )
    artifacts = [context.run_dir / rel for rel in outcome.artifacts]
    return ToolResult(
        ok=True,
        summary=summarize_execution(outcome),
        artifact_paths=artifacts,
        data={"exit_code": outcome.exit_code, "wall_ms": outcome.wall_ms},
    )
