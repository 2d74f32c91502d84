"""reformulator: condense gathered material into the answer format the
question asks for (a letter, a number, a short phrase)."""

from __future__ import annotations

from ..errors import ArgValidation
from ..gateway import ChatMessage, ChatRequest
from .context import RunContext
from .registry import ToolCall, ToolResult

ROLE = "reformulator"

_SYSTEM = (
    "You turn research material into the exact answer a question asks "
    "for. Reply with the answer alone: no preamble, no punctuation beyond "
    "what the answer itself needs."
)


def tool_reformulator(call: ToolCall, context: RunContext) -> ToolResult:
    task = call.args["task"].strip()
    if not task:
        raise ArgValidation("reformulator: task is empty")
    data = call.args["data"]
    if not data:
        raise ArgValidation("reformulator: data is empty")
    if context.gateway is None:
        raise ArgValidation("reformulator: no model gateway configured")
    material = "\n\n".join(str(item) for item in data)
    response = context.gateway.complete(ChatRequest(
        model_role=ROLE,
        messages=[
            ChatMessage("system", _SYSTEM),
            ChatMessage("user", f"Task: {task}\n\nMaterial:\n{material}"),
        ],
    ))
    answer = response.content.strip()
    return ToolResult(ok=True, summary=answer, data={"answer": answer})
