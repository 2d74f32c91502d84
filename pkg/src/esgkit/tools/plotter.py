"""plotter: model-written chart code executed in the sandbox.

The model gets one regeneration attempt when its code fails or produces
no image file; after that the invocation fails with NoArtifact.
"""

from __future__ import annotations

import json

from ..errors import ArgValidation, EsgkitError, NoArtifact
from ..gateway import ChatMessage, ChatRequest
from .context import RunContext
from .interpreter import run_code, summarize_execution
from .parsing import find_blocks
from .registry import ToolCall, ToolResult

ROLE = "plotter"
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".svg", ".gif"}

_SYSTEM = """You write Python plotting code. Given a data table and intent,
respond with a single fenced python block that saves one chart image file
(png preferred) into the current working directory using matplotlib with
the Agg backend. No tool blocks, just the code.
"""


def validate_table(columns) -> None:
    if not isinstance(columns, list) or not columns:
        raise ArgValidation("plotter: columns must be a non-empty list")
    length = None
    for col in columns:
        if not isinstance(col, dict) or "name" not in col or "values" not in col:
            raise ArgValidation("plotter: each column needs name and values")
        values = col["values"]
        if not isinstance(values, list) or not values:
            raise ArgValidation("plotter: column values must be non-empty lists")
        if length is None:
            length = len(values)
        elif len(values) != length:
            raise ArgValidation("plotter: columns must have equal lengths")


def _extract_code(content: str) -> str | None:
    blocks = find_blocks(content, {"python"})
    return blocks[0][1] if blocks else None


def tool_plotter(call: ToolCall, context: RunContext) -> ToolResult:
    columns = call.args["columns"]
    validate_table(columns)
    if context.gateway is None:
        raise ArgValidation("plotter: no model gateway configured")
    intent = str(call.args.get("intent") or "visualize the data")
    messages = [
        ChatMessage("system", _SYSTEM),
        ChatMessage("user",
                    f"Intent: {intent}\n\nData table:\n"
                    f"{json.dumps({'columns': columns}, indent=2)}"),
    ]

    failure = None
    for attempt in range(2):
        response = context.gateway.complete(
            ChatRequest(model_role=ROLE, messages=messages)
        )
        code = _extract_code(response.content)
        if code is None:
            failure = "response contained no python block"
        else:
            try:
                outcome = run_code(code, context)
            except EsgkitError:
                raise
            if outcome.exit_code == 0 and not outcome.timed_out:
                images = [
                    context.run_dir / rel for rel in outcome.artifacts
                    if (context.run_dir / rel).suffix.lower() in IMAGE_SUFFIXES
                ]
                if images:
                    names = ", ".join(p.name for p in images)
                    return ToolResult(
                        ok=True,
                        summary=f"Chart saved to: {names}\n\n"
                                + summarize_execution(outcome),
                        artifact_paths=images,
                    )
                failure = "code ran but produced no image file"
            else:
                failure = (f"code failed (exit {outcome.exit_code}):\n"
                           f"{outcome.stderr.strip()[-500:]}")
        if attempt == 0:
            messages.append(ChatMessage("assistant", response.content))
            messages.append(ChatMessage(
                "user",
                f"That attempt failed: {failure}. Regenerate the full "
                "python block, fixing the problem.",
            ))
    raise NoArtifact(f"plotter produced no chart: {failure}")
