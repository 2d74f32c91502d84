"""Standalone planning: one model call producing an initial plan ledger.

The main loop itself plans through the todo tool, so this op is for
callers that want a plan up front (the ask CLI shows it, tests exercise
it). A malformed response degrades to a single catch-all step rather
than failing the run.
"""

from __future__ import annotations

import json

from ..errors import EmptyInput
from ..gateway import ChatMessage, ChatRequest, ModelGateway
from ..tools.parsing import find_blocks
from ..tools.todo import PlanLedger

_SYSTEM = """You plan ESG analysis work. Break the question into 2-6
concrete steps. Respond with a fenced plan block:

```plan
[{"step_id": "search_local", "description": "...",
  "priority": "high", "category": "retrieval"}]
```"""


def plan(query: str, gateway: ModelGateway, role: str = "main") -> PlanLedger:
    if not query.strip():
        raise EmptyInput("cannot plan an empty query")
    response = gateway.complete(ChatRequest(
        model_role=role,
        messages=[
            ChatMessage("system", _SYSTEM),
            ChatMessage("user", query),
        ],
    ))
    ledger = PlanLedger()
    blocks = find_blocks(response.content, {"plan"})
    items = None
    if blocks:
        try:
            items = json.loads(blocks[0][1])
        except json.JSONDecodeError:
            items = None
    if not isinstance(items, list) or not items:
        ledger.add("answer", query.strip(), priority="high")
        return ledger
    for raw in items:
        if not isinstance(raw, dict):
            continue
        step_id = str(raw.get("step_id", "")).strip()
        description = str(raw.get("description", "")).strip()
        if not step_id or not description:
            continue
        if any(s.step_id == step_id for s in ledger.steps):
            continue  # drop duplicates rather than failing the whole plan
        ledger.add(
            step_id, description,
            priority=str(raw.get("priority") or "medium"),
            category=str(raw.get("category") or ""),
        )
    if not ledger.steps:
        ledger.add("answer", query.strip(), priority="high")
    return ledger
