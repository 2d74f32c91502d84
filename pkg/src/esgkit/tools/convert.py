"""converter tool: extract text from a local file."""

from __future__ import annotations

from ..errors import EmptyDocument
from ..retrieval.documents import extract_text
from .context import RunContext
from .registry import ToolCall, ToolResult


def tool_converter(call: ToolCall, context: RunContext) -> ToolResult:
    path = context.inside_run_dir(call.args["path"])
    text = extract_text(path)
    if not text.strip():
        raise EmptyDocument(f"{path.name} extracted to empty text")
    return ToolResult(ok=True, summary=text, data={"chars": len(text)})
