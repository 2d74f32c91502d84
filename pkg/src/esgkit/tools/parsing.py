"""Fenced-block wire format shared by the orchestrator and sub-agents.

A model acts by emitting exactly one fenced block labeled with a tool
name, containing the JSON arguments:

    I should compute the intensity first.
    ```code_interpreter
    {"code": "print(50000 / 200)"}
    ```
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

_FENCE_RE = re.compile(r"```([A-Za-z_][\w-]*)\s*\n(.*?)```", re.DOTALL)


@dataclass
class ParsedAction:
    thinking: str  # free text before the block
    tool: str | None
    args: dict | None
    problem: str | None = None  # why parsing failed, for corrective feedback


def find_blocks(content: str, labels: set[str] | None = None) -> list[tuple[str, str]]:
    """All fenced blocks as (label, payload); optionally filtered."""
    out = []
    for m in _FENCE_RE.finditer(content):
        if labels is None or m.group(1) in labels:
            out.append((m.group(1), m.group(2)))
    return out


def parse_action(content: str, tool_names: set[str]) -> ParsedAction:
    """Parse one model turn into thinking plus at most one tool call.

    Only blocks labeled with a known tool name count; stray code fences
    (```python examples and the like) are part of the thinking. When
    several tool blocks appear the first wins.
    """
    first = None
    for m in _FENCE_RE.finditer(content):
        if m.group(1) in tool_names:
            first = m
            break
    if first is None:
        return ParsedAction(
            thinking=content.strip(),
            tool=None,
            args=None,
            problem="no tool block found",
        )
    thinking = content[: first.start()].strip()
    try:
        args = json.loads(first.group(2))
    except json.JSONDecodeError as exc:
        return ParsedAction(
            thinking=thinking,
            tool=first.group(1),
            args=None,
            problem=f"arguments are not valid JSON: {exc}",
        )
    if not isinstance(args, dict):
        return ParsedAction(
            thinking=thinking,
            tool=first.group(1),
            args=None,
            problem="arguments must be a JSON object",
        )
    return ParsedAction(thinking=thinking, tool=first.group(1), args=args)
