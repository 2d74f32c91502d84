"""The deep_researcher sub-agent.

A budgeted think-search loop: each model turn either requests one web
search (fenced ``web_search`` block) or writes the final findings. The
findings are persisted as research_<call_id>.md with a references section
built from every result the loop actually fetched, in first-use order.
"""

from __future__ import annotations

import uuid

from ..errors import ArgValidation, BackendUnavailable, BudgetExhausted
from ..gateway import ChatMessage, ChatRequest
from .context import RunContext
from .parsing import find_blocks
from .registry import ToolCall, ToolResult
from .web import SearchResult, format_results

import json

ROLE = "deep_researcher"

_SYSTEM = """You are a focused research agent working on one task.
Each turn, either request one web search:

```web_search
{"query": "...", "filter_year": null}
```

or, once you have enough evidence, write your final findings as plain
markdown (no tool block). Start the findings with a one-paragraph summary
beginning "Answer Found: Yes." or "Answer Found: No.".
"""


def _first_paragraph(text: str) -> str:
    for para in text.split("\n\n"):
        cleaned = para.strip()
        if cleaned:
            return " ".join(cleaned.split())
    return ""


def write_research_report(run_dir, title: str, body: str,
                          references: list[SearchResult], call_id: str):
    lines = [f"# {title}", "", body.strip(), "", "## References", ""]
    for i, ref in enumerate(references, start=1):
        label = ref.title or ref.url
        lines.append(f"[{i}]({ref.url}) {label}")
    lines.append("")
    path = run_dir / f"research_{call_id}.md"
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


def tool_deep_researcher(call: ToolCall, context: RunContext) -> ToolResult:
    task = call.args["task"].strip()
    if not task:
        raise ArgValidation("deep_researcher: task is empty")
    if context.gateway is None:
        raise ArgValidation("deep_researcher: no model gateway configured")
    call_id = str(call.args.get("call_id") or call.call_id
                  or f"research_{uuid.uuid4().hex[:8]}")
    title = str(call.args.get("title") or task[:80])
    default_year = call.args.get("filter_year")
    budget = context.budget_for("deep_researcher", 3)

    messages = [ChatMessage("system", _SYSTEM)]
    prior = context.history("deep_researcher")
    if prior:
        notes = "\n".join(f"- {summary[:200]}" for _, summary in prior[-3:])
        messages.append(ChatMessage("system", f"Earlier research this run:\n{notes}"))
    messages.append(ChatMessage("user", f"Research task: {task}"))

    references: list[SearchResult] = []
    seen_urls: set[str] = set()
    synthesis = None
    for _ in range(budget):
        response = context.gateway.complete(
            ChatRequest(model_role=ROLE, messages=messages)
        )
        blocks = find_blocks(response.content, {"web_search"})
        if not blocks:
            synthesis = response.content.strip()
            break
        try:
            args = json.loads(blocks[0][1])
        except json.JSONDecodeError:
            args = {}
        query = str(args.get("query", "")).strip() or task
        year = args.get("filter_year", default_year)
        messages.append(ChatMessage("assistant", response.content))
        try:
            results = context.search.search(query, year) if context.search else []
        except BackendUnavailable:
            results = []
        for r in results:
            if r.url and r.url not in seen_urls:
                seen_urls.add(r.url)
                references.append(r)
                context.record_uri(r.url)
        messages.append(ChatMessage(
            "tool", format_results(results), tool_name="web_search"
        ))
    if synthesis is None:
        raise BudgetExhausted(
            f"deep_researcher used {budget} model calls without findings"
        )

    path = write_research_report(context.run_dir, title, synthesis,
                                 references, call_id)
    summary = (
        f"Deep research summary: {_first_paragraph(synthesis)}\n\n"
        f"Report saved to: {path.name}"
    )
    return ToolResult(ok=True, summary=summary, artifact_paths=[path],
                      data={"references": [vars(r) for r in references]})
