"""Citation extraction and the correctness / faithfulness metrics.

A citation instance is one inline marker ``[n](uri)`` attached to a claim
sentence in the report body. Correctness asks whether the cited evidence
semantically supports the claim; faithfulness additionally requires the
reference to exist in the reference list and to be causally traceable to
material the run actually retrieved or produced. Faithfulness can never
exceed correctness: an unsupported citation is unfaithful by definition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import MalformedReport, NoCitations
from ..gateway import ChatMessage, ChatRequest, ModelGateway

_REFS_HEADING_RE = re.compile(r"^##\s+References\s*:?\s*$", re.IGNORECASE | re.MULTILINE)
_REF_LINE_RE = re.compile(r"^\[(\d+)\]\(([^)]+)\)\s*(.*)$")
_CITE_RE = re.compile(r"(?<!!)\[(\d+)\]\(([^)]*)\)")
_SENT_SPLIT_RE = re.compile(r"(?<=[.?!])\s+")
_LIST_ITEM_RE = re.compile(r"^\s*(?:[-*+]|\d+[.)])\s+")


def split_report(markdown: str) -> tuple[str, str]:
    """Body text and references section. Raises MalformedReport when the
    report has no references heading."""
    m = _REFS_HEADING_RE.search(markdown)
    if not m:
        raise MalformedReport("report has no '## References' heading")
    return markdown[: m.start()], markdown[m.end():]


def parse_references(refs_section: str) -> dict[int, tuple[str, str]]:
    refs: dict[int, tuple[str, str]] = {}
    for line in refs_section.splitlines():
        m = _REF_LINE_RE.match(line.strip())
        if m and int(m.group(1)) not in refs:
            refs[int(m.group(1))] = (m.group(2), m.group(3).strip())
    return refs


@dataclass
class CitationInstance:
    claim: str  # sentence or list item the marker is attached to, markers stripped
    index: int
    uri: str | None  # None when the index is absent from the reference list


def _claim_units(body: str) -> list[str]:
    units: list[str] = []
    paragraph: list[str] = []

    def flush():
        if paragraph:
            text = " ".join(paragraph)
            units.extend(s for s in _SENT_SPLIT_RE.split(text) if s.strip())
            paragraph.clear()

    for line in body.splitlines():
        if _LIST_ITEM_RE.match(line):
            flush()
            units.append(line.strip())
        elif line.strip():
            paragraph.append(line.strip())
        else:
            flush()
    flush()
    return units


def extract_citations(markdown: str) -> list[CitationInstance]:
    """Every inline citation marker in the body, tied to its claim and
    resolved against the reference list."""
    body, refs_section = split_report(markdown)
    refs = parse_references(refs_section)
    instances = []
    for unit in _claim_units(body):
        markers = _CITE_RE.findall(unit)
        if not markers:
            continue
        claim = _CITE_RE.sub("", unit).strip()
        for index_str, inline_uri in markers:
            index = int(index_str)
            uri = refs.get(index, (None, ""))[0]
            if uri is None and inline_uri:
                # marker carries its own uri but the index is missing from
                # the reference list: existence still fails
                uri = None
            instances.append(CitationInstance(claim=claim, index=index, uri=uri))
    return instances


@dataclass
class CitationJudgment:
    index: int
    uri: str | None
    existence: bool
    support: bool
    causality: bool
    approximate: bool  # causality was approximated by artifact-set membership

    @property
    def correct(self) -> bool:
        return self.support

    @property
    def faithful(self) -> bool:
        return self.existence and self.support and self.causality


_SUPPORT_SYSTEM = (
    "You judge citations in ESG analysis reports. Given a claim and the "
    "cited evidence, reply with the single word 'supported' if the evidence "
    "semantically entails the claim, otherwise 'unsupported'."
)


def judge_citation(instance: CitationInstance, evidence_text: str,
                   available_uris: set[str],
                   gateway: ModelGateway | None = None,
                   judge_role: str = "judge") -> CitationJudgment:
    """Judge one citation instance.

    Existence is mechanical (the index resolved to a reference). Support
    costs one judge call, skipped when existence already failed. Causality
    is approximated by membership of the uri in the set of uris this run
    retrieved or produced; the approximation is flagged on the judgment.
    """
    existence = instance.uri is not None
    support = False
    if existence:
        if gateway is None:
            raise ValueError("a gateway is required to judge support")
        response = gateway.complete(ChatRequest(
            model_role=judge_role,
            messages=[
                ChatMessage("system", _SUPPORT_SYSTEM),
                ChatMessage(
                    "user",
                    f"Claim: {instance.claim}\n\nEvidence ({instance.uri}):\n"
                    f"{evidence_text}",
                ),
            ],
        ))
        lowered = response.content.casefold()
        # "unsupported" contains "supported"; check it first, and treat an
        # unparseable verdict as unsupported
        if "unsupported" in lowered:
            support = False
        else:
            support = "supported" in lowered
    causality = existence and instance.uri in available_uris
    return CitationJudgment(
        index=instance.index,
        uri=instance.uri,
        existence=existence,
        support=support,
        causality=causality,
        approximate=existence,
    )


@dataclass
class CitationScores:
    n_citations: int
    correctness: float
    faithfulness: float


def citation_scores(judgments: list[CitationJudgment]) -> CitationScores:
    """c_cor / c and c_faith / c at full precision."""
    if not judgments:
        raise NoCitations("citation scores are undefined for zero citations")
    c = len(judgments)
    return CitationScores(
        n_citations=c,
        correctness=sum(j.correct for j in judgments) / c,
        faithfulness=sum(j.faithful for j in judgments) / c,
    )
