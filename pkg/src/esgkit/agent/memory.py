"""General memory: periodic distillation of the main loop's progress.

Sub-agents keep their own tool-local history; this is the centralized
layer on top. Every few steps the orchestrator asks a model to compress
the recent window into a handful of insights whose entity names are
normalized through the same resolution rules the retrieval graph uses,
so "Apple" and "Apple Inc." never coexist in memory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import EmptyInput
from ..gateway import ChatMessage, ChatRequest, ModelGateway
from ..retrieval.graph import EntityNode, resolve_entities
from ..tools.parsing import find_blocks

_SYSTEM = """You maintain the working memory of an ESG analysis agent.
Given recent steps, distill at most {max_insights} durable insights.
Respond with a fenced memory block:

```memory
[{{"kind": "fact", "text": "...", "source_step": 3,
   "entities": ["Company A"]}}]
```"""


@dataclass
class MemoryEntry:
    kind: str
    text: str
    source_step: int | None = None
    entities: list[str] = field(default_factory=list)


def _canonicalize(names: list[str]) -> list[str]:
    nodes = [EntityNode(str(n), aliases={str(n)}) for n in names if str(n).strip()]
    return [node.canonical_name for node in resolve_entities(nodes)]


def synthesize_memory(step_lines: list[str], gateway: ModelGateway,
                      role: str = "memory",
                      max_insights: int = 5) -> list[MemoryEntry]:
    """Distill recent steps into memory entries.

    Malformed model output yields an empty list: memory is best effort
    and must never sink the run.
    """
    if not step_lines:
        raise EmptyInput("no steps to synthesize memory from")
    response = gateway.complete(ChatRequest(
        model_role=role,
        messages=[
            ChatMessage("system", _SYSTEM.format(max_insights=max_insights)),
            ChatMessage("user", "Recent steps:\n" + "\n".join(step_lines)),
        ],
    ))
    blocks = find_blocks(response.content, {"memory"})
    if not blocks:
        return []
    try:
        items = json.loads(blocks[0][1])
    except json.JSONDecodeError:
        return []
    if not isinstance(items, list):
        return []
    entries = []
    for raw in items[:max_insights]:
        if not isinstance(raw, dict) or not str(raw.get("text", "")).strip():
            continue
        source = raw.get("source_step")
        entries.append(MemoryEntry(
            kind=str(raw.get("kind") or "insight"),
            text=str(raw["text"]).strip(),
            source_step=int(source) if isinstance(source, int) else None,
            entities=_canonicalize(list(raw.get("entities") or [])),
        ))
    return entries


def render_memory(entries: list[MemoryEntry]) -> str:
    lines = ["Working memory:"]
    for entry in entries:
        tags = f" [{', '.join(entry.entities)}]" if entry.entities else ""
        lines.append(f"- ({entry.kind}) {entry.text}{tags}")
    return "\n".join(lines)
