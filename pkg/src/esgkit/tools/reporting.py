"""Report assembly: validated draft -> markdown with references."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ArgValidation, DanglingCitation
from .context import RunContext
from .registry import ToolCall, ToolResult

_INLINE_CITE_RE = re.compile(r"(?<!!)\[(\d+)\]\(")


@dataclass
class ReportSection:
    heading: str
    body_markdown: str


@dataclass
class ReportCitation:
    index: int
    uri: str
    label: str = ""


@dataclass
class ReportDraft:
    title: str
    sections: list[ReportSection]
    citations: list[ReportCitation] = field(default_factory=list)
    figures: list[str] = field(default_factory=list)  # paths relative to run dir

    def validate(self) -> None:
        if not self.title.strip():
            raise ArgValidation("report: title is empty")
        if not self.sections:
            raise ArgValidation("report: at least one section is required")
        indices = [c.index for c in self.citations]
        if indices != list(range(1, len(indices) + 1)):
            raise ArgValidation(
                "report: citation indices must be contiguous from 1"
            )
        known = set(indices)
        for section in self.sections:
            for m in _INLINE_CITE_RE.finditer(section.body_markdown):
                if int(m.group(1)) not in known:
                    raise DanglingCitation(
                        f"report body cites [{m.group(1)}] which is not in "
                        "the citation list"
                    )


def render_report(draft: ReportDraft) -> str:
    lines = [f"# {draft.title}", ""]
    for section in draft.sections:
        lines += [f"## {section.heading}", "", section.body_markdown.strip(), ""]
    for figure in draft.figures:
        stem = Path(figure).stem
        lines += [f"![{stem}]({figure})", ""]
    lines += ["## References", ""]
    for cite in draft.citations:
        lines.append(f"[{cite.index}]({cite.uri}) {cite.label}".rstrip())
    lines.append("")
    return "\n".join(lines)


def write_report(draft: ReportDraft, out_path: str | Path) -> Path:
    draft.validate()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(render_report(draft), encoding="utf-8")
    return out_path


def tool_report(call: ToolCall, context: RunContext) -> ToolResult:
    fmt = str(call.args.get("format") or "markdown")
    if fmt != "markdown":
        raise ArgValidation(f"report: unsupported format {fmt!r}")
    sections = []
    for raw in call.args["sections"]:
        if not isinstance(raw, dict) or "heading" not in raw:
            raise ArgValidation("report: sections need heading and body")
        sections.append(ReportSection(
            heading=str(raw["heading"]),
            body_markdown=str(raw.get("body") or raw.get("body_markdown") or ""),
        ))
    citations = []
    for raw in call.args.get("citations") or []:
        if not isinstance(raw, dict) or "index" not in raw or "uri" not in raw:
            raise ArgValidation("report: citations need index and uri")
        citations.append(ReportCitation(
            index=int(raw["index"]),
            uri=str(raw["uri"]),
            label=str(raw.get("label") or ""),
        ))
    figures = []
    for raw in call.args.get("figures") or []:
        path = context.inside_run_dir(str(raw))
        if not path.exists():
            raise ArgValidation(f"report: figure not found: {raw}")
        figures.append(str(raw))
    draft = ReportDraft(
        title=call.args["title"],
        sections=sections,
        citations=citations,
        figures=figures,
    )
    out_path = Path(context.report_dir) / "report.md"
    # the report may live outside run_dir when the harness redirects it;
    # hygiene checks run against whichever directory owns it
    draft.validate()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(render_report(draft), encoding="utf-8")
    summary = f"Report saved to: {out_path}"
    artifacts = [out_path] if context.report_dir == context.run_dir else []
    return ToolResult(ok=True, summary=summary, artifact_paths=artifacts,
                      data={"path": str(out_path)})
