from .builtin import TOOL_SPECS, build_default_registry, tool_done, tool_retriever
from .context import RunContext
from .parsing import ParsedAction, find_blocks, parse_action
from .registry import (
    CANONICAL_TOOLS,
    ArgSpec,
    ToolCall,
    ToolRegistry,
    ToolResult,
    ToolSpec,
    validate_args,
)
from .reporting import ReportCitation, ReportDraft, ReportSection, render_report, write_report
from .todo import PlanLedger, PlanStep
from .web import FixtureSearchBackend, SearchResult

__all__ = [
    "ArgSpec",
    "CANONICAL_TOOLS",
    "FixtureSearchBackend",
    "ParsedAction",
    "PlanLedger",
    "PlanStep",
    "ReportCitation",
    "ReportDraft",
    "ReportSection",
    "RunContext",
    "SearchResult",
    "TOOL_SPECS",
    "ToolCall",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "build_default_registry",
    "find_blocks",
    "parse_action",
    "render_report",
    "tool_done",
    "tool_retriever",
    "validate_args",
    "write_report",
]
