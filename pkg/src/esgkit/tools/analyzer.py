"""The deep_analyzer sub-agent: budgeted close reading of local files."""

from __future__ import annotations

from ..errors import ArgValidation, BudgetExhausted
from ..gateway import ChatMessage, ChatRequest
from ..retrieval.documents import extract_text
from .context import RunContext
from .parsing import find_blocks
from .registry import ToolCall, ToolResult

ROLE = "deep_analyzer"
WINDOW_CHARS = 6000

_SYSTEM = """You are an analysis agent examining documents for one task.
You see the material in windows. Each turn, either request the next window
with:

```continue
{}
```

or write your final structured analysis as markdown (no tool block).
"""


def tool_deep_analyzer(call: ToolCall, context: RunContext) -> ToolResult:
    task = call.args["task"].strip()
    if not task:
        raise ArgValidation("deep_analyzer: task is empty")
    if context.gateway is None:
        raise ArgValidation("deep_analyzer: no model gateway configured")
    file_paths = call.args.get("file_paths") or []
    texts = []
    for raw in file_paths:
        path = context.inside_run_dir(str(raw))
        texts.append(f"### {path.name}\n\n{extract_text(path)}")
    material = "\n\n".join(texts) if texts else "(no files attached)"
    windows = [material[i:i + WINDOW_CHARS]
               for i in range(0, max(len(material), 1), WINDOW_CHARS)]
    budget = context.budget_for("deep_analyzer", 3)

    messages = [ChatMessage("system", _SYSTEM)]
    prior = context.history("deep_analyzer")
    if prior:
        notes = "\n".join(f"- {summary[:200]}" for _, summary in prior[-3:])
        messages.append(ChatMessage("system", f"Earlier analyses this run:\n{notes}"))
    messages.append(ChatMessage(
        "user",
        f"Task: {task}\n\nWindow 1/{len(windows)}:\n\n{windows[0]}",
    ))

    shown = 1
    for _ in range(budget):
        response = context.gateway.complete(
            ChatRequest(model_role=ROLE, messages=messages)
        )
        if not find_blocks(response.content, {"continue"}):
            return ToolResult(ok=True, summary=response.content.strip())
        messages.append(ChatMessage("assistant", response.content))
        if shown < len(windows):
            window = windows[shown]
            shown += 1
            messages.append(ChatMessage(
                "user", f"Window {shown}/{len(windows)}:\n\n{window}"
            ))
        else:
            messages.append(ChatMessage(
                "user", "No more windows. Write your final analysis."
            ))
    raise BudgetExhausted(
        f"deep_analyzer used {budget} model calls without a final analysis"
    )
