"""Canonical tool wiring: specs plus implementations for all twelve."""

from __future__ import annotations

from ..errors import AlreadyTerminated, ArgValidation, EmptyIndex
from ..retrieval.reports import write_retrieval_report
from .analyzer import tool_deep_analyzer
from .context import RunContext
from .convert import tool_converter
from .interpreter import tool_code_interpreter
from .plotter import tool_plotter
from .reformulator import tool_reformulator
from .registry import ArgSpec, ToolCall, ToolRegistry, ToolResult, ToolSpec
from .reporting import tool_report
from .research import tool_deep_researcher
from .shell import tool_bash
from .todo import tool_todo
from .web import tool_web_search


def tool_retriever(call: ToolCall, context: RunContext) -> ToolResult:
    query = call.args["query"].strip()
    if not query:
        raise ArgValidation("retriever: query is empty")
    if context.index is None:
        raise EmptyIndex("no knowledge index is attached to this run")
    top_k = call.args.get("top_k") or context.retrieval_top_k
    mode = str(call.args.get("mode") or context.retrieval_mode)
    hits = context.index.retrieve(query, top_k=top_k, mode=mode)
    titles = {
        doc_id: doc.title for doc_id, doc in context.index.documents.items()
    }
    report = write_retrieval_report(query, hits, context.run_dir, titles=titles)
    for hit in hits:
        context.record_uri(hit.uri)
    summary = (
        f"Retrieved {len(hits)} documents for query: {query}\n\n"
        f"Report saved to: {report.path.name}"
    )
    return ToolResult(
        ok=True,
        summary=summary,
        artifact_paths=[report.path],
        data={"hits": [
            {"chunk_id": h.chunk_id, "doc_id": h.doc_id,
             "score": h.score, "source": h.source}
            for h in hits
        ]},
    )


def tool_done(call: ToolCall, context: RunContext) -> ToolResult:
    if context.terminated:
        raise AlreadyTerminated("the run already terminated")
    result = call.args["result"]
    context.terminated = True
    # strip surrounding whitespace only; the answer is otherwise verbatim
    context.final_answer = result.strip()
    context.final_reasoning = (call.args.get("reasoning") or "").strip() or None
    return ToolResult(ok=True, summary=context.final_answer)


TOOL_SPECS: dict[str, ToolSpec] = {
    "converter": ToolSpec(
        name="converter",
        description="Extract plain text from a local file.",
        args={"path": ArgSpec("path", required=True)},
    ),
    "deep_analyzer": ToolSpec(
        name="deep_analyzer",
        description="Close-read local files against an analysis task.",
        args={
            "task": ArgSpec("text", required=True),
            "file_paths": ArgSpec("list"),
        },
        step_budget=3,
    ),
    "code_interpreter": ToolSpec(
        name="code_interpreter",
        description="Run a Python snippet in the sandbox.",
        args={
            "code": ArgSpec("text", required=True),
            "timeout_s": ArgSpec("int"),
        },
    ),
    "retriever": ToolSpec(
        name="retriever",
        description="Query the local knowledge index.",
        args={
            "query": ArgSpec("text", required=True),
            "top_k": ArgSpec("int"),
            "mode": ArgSpec("text"),
        },
    ),
    "deep_researcher": ToolSpec(
        name="deep_researcher",
        description="Budgeted web research producing a findings report.",
        args={
            "task": ArgSpec("text", required=True),
            "image": ArgSpec("text"),
            "filter_year": ArgSpec("int"),
            "title": ArgSpec("text"),
            "call_id": ArgSpec("text"),
        },
        step_budget=3,
    ),
    "web_search": ToolSpec(
        name="web_search",
        description="One web search against the configured backend.",
        args={
            "query": ArgSpec("text", required=True),
            "filter_year": ArgSpec("int"),
        },
    ),
    "plotter": ToolSpec(
        name="plotter",
        description="Generate a chart image from a data table.",
        args={
            "columns": ArgSpec("list", required=True),
            "intent": ArgSpec("text"),
        },
    ),
    "report": ToolSpec(
        name="report",
        description=(
            "Assemble the final markdown report. sections is a list of "
            "{heading, body} where body marks citations inline as [n](uri); "
            "citations is a list of {index, uri, label} numbered from 1; "
            "figures lists image paths inside the run directory."
        ),
        args={
            "title": ArgSpec("text", required=True),
            "sections": ArgSpec("list", required=True),
            "citations": ArgSpec("list"),
            "figures": ArgSpec("list"),
            "format": ArgSpec("text"),
        },
    ),
    "reformulator": ToolSpec(
        name="reformulator",
        description="Condense material into the exact answer format.",
        args={
            "task": ArgSpec("text", required=True),
            "data": ArgSpec("list", required=True),
        },
    ),
    "todo": ToolSpec(
        name="todo",
        description="Manage the plan ledger.",
        args={
            "action": ArgSpec("text", required=True),
            "task": ArgSpec("text"),
            "step_id": ArgSpec("text"),
            "status": ArgSpec("text"),
            "result": ArgSpec("text"),
            "priority": ArgSpec("text"),
            "category": ArgSpec("text"),
            "after_step_id": ArgSpec("text"),
            "export_path": ArgSpec("path"),
            "parameters": ArgSpec("map"),
        },
    ),
    "bash": ToolSpec(
        name="bash",
        description="Run a shell command inside the run directory.",
        args={
            "command": ArgSpec("text", required=True),
            "timeout_s": ArgSpec("int"),
        },
    ),
    "done": ToolSpec(
        name="done",
        description="Terminate the run with the final answer.",
        args={
            "result": ArgSpec("text", required=True),
            "reasoning": ArgSpec("text"),
        },
    ),
}

_IMPLS = {
    "converter": tool_converter,
    "deep_analyzer": tool_deep_analyzer,
    "code_interpreter": tool_code_interpreter,
    "retriever": tool_retriever,
    "deep_researcher": tool_deep_researcher,
    "web_search": tool_web_search,
    "plotter": tool_plotter,
    "report": tool_report,
    "reformulator": tool_reformulator,
    "todo": tool_todo,
    "bash": tool_bash,
    "done": tool_done,
}


def build_default_registry(disabled: set[str] | None = None) -> ToolRegistry:
    """All twelve canonical tools; names in ``disabled`` register in the
    disabled state so invoking them fails with ToolDisabled."""
    disabled = disabled or set()
    registry = ToolRegistry()
    for name, spec in TOOL_SPECS.items():
        registry.register(spec, _IMPLS[name], enabled=name not in disabled)
    return registry
