"""Mechanical report statistics: length, charts, references, citations."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .citations import _CITE_RE, _REF_LINE_RE, _REFS_HEADING_RE

_IMAGE_RE = re.compile(r"!\[[^\]]*\]\([^)]+\)")
_FENCE_RE = re.compile(r"```.*?```", re.DOTALL)


@dataclass
class ReportStats:
    word_count: int
    chart_count: int
    reference_count: int
    citation_count: int


def report_statistics(markdown: str) -> ReportStats:
    """Counts used by the report-quality table.

    Words are whitespace tokens of the body with fenced code, image embeds
    and the references section excluded. Charts are image embeds in the
    body. References are numbered entries under the references heading;
    citations are inline [n](uri) markers in the body, so one reference
    reused five times counts once as a reference and five times as a
    citation. A report without a references section has zero references
    and its whole text treated as body.
    """
    m = _REFS_HEADING_RE.search(markdown)
    if m:
        body, refs_section = markdown[: m.start()], markdown[m.end():]
    else:
        body, refs_section = markdown, ""

    reference_count = sum(
        1 for line in refs_section.splitlines()
        if _REF_LINE_RE.match(line.strip())
    )
    chart_count = len(_IMAGE_RE.findall(body))
    citation_count = len(_CITE_RE.findall(body))

    prose = _FENCE_RE.sub(" ", body)
    prose = _IMAGE_RE.sub(" ", prose)
    word_count = len(prose.split())

    return ReportStats(
        word_count=word_count,
        chart_count=chart_count,
        reference_count=reference_count,
        citation_count=citation_count,
    )
