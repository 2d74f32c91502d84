"""Tool registry: canonical names, arg schemas, dispatch, trace recording.

The registry is the only path agents use to run tools. Every invocation,
successful or not, appends exactly one record to the run context's
invocation log; errors travel in ToolResult.error instead of crashing the
loop, so the orchestrator can relay them back to the model.
"""

from __future__ import annotations

import hashlib
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..errors import (
    ArgValidation,
    DuplicateTool,
    EsgkitError,
    JailViolation,
    ToolDisabled,
    ToolError,
    UnknownTool,
    UnknownToolName,
)
from .context import RunContext

CANONICAL_TOOLS = frozenset({
    "converter",
    "deep_analyzer",
    "code_interpreter",
    "retriever",
    "deep_researcher",
    "web_search",
    "plotter",
    "report",
    "reformulator",
    "todo",
    "bash",
    "done",
})

_ARG_TYPES = {
    "text": (str,),
    "int": (int,),
    "real": (int, float),
    "bool": (bool,),
    "path": (str,),
    "list": (list,),
    "map": (dict,),
}


@dataclass
class ArgSpec:
    type: str  # one of _ARG_TYPES
    required: bool = False

    def __post_init__(self):
        if self.type not in _ARG_TYPES:
            raise ValueError(f"unknown arg type: {self.type}")


@dataclass
class ToolSpec:
    name: str
    description: str
    args: dict[str, ArgSpec] = field(default_factory=dict)
    step_budget: int | None = None  # sub-agent LLM call budget, if any


@dataclass
class ToolCall:
    tool: str
    args: dict = field(default_factory=dict)
    call_id: str = ""


@dataclass
class ToolResult:
    ok: bool
    summary: str = ""
    artifact_paths: list[Path] = field(default_factory=list)
    error: dict | None = None  # {"kind", "message"} when ok is False
    data: dict = field(default_factory=dict)  # structured extras

    def digest(self) -> str:
        basis = self.summary if self.ok else str(self.error)
        return hashlib.sha256(basis.encode("utf-8")).hexdigest()[:16]


@dataclass
class _Entry:
    spec: ToolSpec
    impl: Callable[[ToolCall, RunContext], ToolResult]
    enabled: bool = True


def validate_args(spec: ToolSpec, args: dict) -> None:
    """Check required keys and value types. Unknown keys pass through;
    a None value for an optional arg counts as absent."""
    for name, arg in spec.args.items():
        value = args.get(name)
        if value is None:
            if arg.required:
                raise ArgValidation(f"{spec.name}: missing required arg {name!r}")
            continue
        expected = _ARG_TYPES[arg.type]
        if arg.type in ("int", "real") and isinstance(value, bool):
            raise ArgValidation(f"{spec.name}: arg {name!r} must be {arg.type}")
        if not isinstance(value, expected):
            raise ArgValidation(
                f"{spec.name}: arg {name!r} must be {arg.type}, "
                f"got {type(value).__name__}"
            )


class ToolRegistry:
    def __init__(self):
        self._entries: dict[str, _Entry] = {}

    def register(self, spec: ToolSpec,
                 impl: Callable[[ToolCall, RunContext], ToolResult],
                 enabled: bool = True) -> None:
        if spec.name not in CANONICAL_TOOLS:
            raise UnknownToolName(f"{spec.name!r} is not a canonical tool name")
        if spec.name in self._entries:
            raise DuplicateTool(f"{spec.name!r} is already registered")
        self._entries[spec.name] = _Entry(spec=spec, impl=impl, enabled=enabled)

    def enable(self, name: str) -> None:
        self._require(name).enabled = True

    def disable(self, name: str) -> None:
        self._require(name).enabled = False

    def is_enabled(self, name: str) -> bool:
        return self._require(name).enabled

    def spec(self, name: str) -> ToolSpec:
        return self._require(name).spec

    def names(self, enabled_only: bool = False) -> set[str]:
        return {
            name for name, entry in self._entries.items()
            if entry.enabled or not enabled_only
        }

    def _require(self, name: str) -> _Entry:
        entry = self._entries.get(name)
        if entry is None:
            raise UnknownTool(f"tool {name!r} is not registered")
        return entry

    def invoke(self, call: ToolCall, context: RunContext) -> ToolResult:
        """Dispatch one tool call.

        Tool-level failures (disabled tool, bad args, tool errors) come
        back as error results; only genuine programming errors propagate.
        """
        if not call.call_id:
            call.call_id = f"{call.tool}_{uuid.uuid4().hex[:8]}"
        started = time.monotonic()
        try:
            entry = self._entries.get(call.tool)
            if entry is None:
                raise UnknownTool(f"tool {call.tool!r} is not registered")
            if not entry.enabled:
                raise ToolDisabled(f"tool {call.tool!r} is disabled for this run")
            validate_args(entry.spec, call.args)
            result = entry.impl(call, context)
            self._check_artifacts(result, context)
        except ToolError as exc:
            result = ToolResult(ok=False,
                                error={"kind": exc.kind, "message": str(exc)})
        except EsgkitError as exc:
            result = ToolResult(
                ok=False,
                error={"kind": type(exc).__name__, "message": str(exc)},
            )
        duration_ms = int((time.monotonic() - started) * 1000)
        context.invocation_log.append({
            "call_id": call.call_id,
            "tool": call.tool,
            "args": call.args,
            "ok": result.ok,
            "digest": result.digest(),
            "error": result.error,
            "duration_ms": duration_ms,
        })
        context.tool_history.setdefault(call.tool, []).append(
            (call.args, result.summary if result.ok else str(result.error))
        )
        for path in result.artifact_paths:
            context.record_artifact(path)
        return result

    @staticmethod
    def _check_artifacts(result: ToolResult, context: RunContext) -> None:
        root = context.run_dir.resolve()
        for path in result.artifact_paths:
            resolved = Path(path).resolve()
            if resolved != root and root not in resolved.parents:
                raise JailViolation(
                    f"tool artifact escapes the run directory: {path}"
                )
