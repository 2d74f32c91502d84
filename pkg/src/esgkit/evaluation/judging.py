"""Rubric judging of open-ended reports and ensemble aggregation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from statistics import fmean

from ..errors import JudgeFormatError, NoJudges
from ..gateway import ChatMessage, ChatRequest, ModelGateway

DIMENSIONS = (
    "richness",
    "completeness",
    "depth",
    "coherence",
    "professionalism",
    "expressiveness",
)

_JSON_BLOCK_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)

_RUBRIC_SYSTEM = """You are an exacting reviewer of analyst-grade ESG reports.
Score the report on six dimensions, each from 0 to 10 (decimals allowed):
richness (information density and evidence variety), completeness (coverage
of the question), depth (analytical rigor), coherence (logical flow),
professionalism (tone and structure), expressiveness (clarity of prose and
visuals). Respond with a fenced json block containing the six scores and a
"justification" string, for example:

```json
{"richness": 7.5, "completeness": 8.0, "depth": 6.5, "coherence": 8.0,
 "professionalism": 8.5, "expressiveness": 7.0,
 "justification": "..."}
```"""


@dataclass
class JudgeScores:
    judge: str
    scores: dict[str, float] = field(default_factory=dict)
    justification: str = ""


def _parse_scores(content: str) -> tuple[dict[str, float], str]:
    m = _JSON_BLOCK_RE.search(content)
    raw = m.group(1) if m else content
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError:
        # fall back to the first {...} span in the text
        brace = re.search(r"\{.*\}", content, re.DOTALL)
        if not brace:
            raise JudgeFormatError("no JSON object in judge response")
        try:
            payload = json.loads(brace.group(0))
        except json.JSONDecodeError as exc:
            raise JudgeFormatError(f"unparseable judge response: {exc}")
    if not isinstance(payload, dict):
        raise JudgeFormatError("judge response is not an object")
    scores = {}
    for dim in DIMENSIONS:
        if dim not in payload:
            raise JudgeFormatError(f"missing dimension {dim!r}")
        value = payload[dim]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise JudgeFormatError(f"dimension {dim!r} is not numeric")
        if not 0.0 <= float(value) <= 10.0:
            raise JudgeFormatError(f"dimension {dim!r} out of range: {value}")
        scores[dim] = float(value)
    return scores, str(payload.get("justification", ""))


def judge_dimensions(report_markdown: str, gateway: ModelGateway,
                     judge_role: str) -> JudgeScores:
    """One judge call scoring the six rubric dimensions.

    An invalid response gets exactly one re-ask; a second failure raises
    JudgeFormatError.
    """
    messages = [
        ChatMessage("system", _RUBRIC_SYSTEM),
        ChatMessage("user", f"Score this report.\n\n{report_markdown}"),
    ]
    response = gateway.complete(ChatRequest(model_role=judge_role, messages=messages))
    try:
        scores, justification = _parse_scores(response.content)
    except JudgeFormatError:
        messages = messages + [
            ChatMessage("assistant", response.content),
            ChatMessage("user",
                        "That response was not a valid score object. Respond "
                        "with only the fenced json block described above."),
        ]
        retry = gateway.complete(ChatRequest(model_role=judge_role, messages=messages))
        scores, justification = _parse_scores(retry.content)
    return JudgeScores(judge=judge_role, scores=scores, justification=justification)


def ensemble_mean(per_judge: list[JudgeScores]) -> dict[str, float]:
    """Arithmetic mean per dimension across judges, full precision."""
    if not per_judge:
        raise NoJudges("ensemble needs at least one judge")
    for js in per_judge:
        missing = [d for d in DIMENSIONS if d not in js.scores]
        if missing:
            raise JudgeFormatError(f"judge {js.judge} missing {missing}")
    return {
        dim: fmean(js.scores[dim] for js in per_judge)
        for dim in DIMENSIONS
    }


def overall_average(dimension_means: dict[str, float],
                    correctness: float | None = None,
                    faithfulness: float | None = None) -> float:
    """Single summary score for a report.

    Citation ratios live in [0, 1] while rubric scores live in [0, 10], so
    correctness and faithfulness are scaled by 10 before averaging over the
    eight components. When citation metrics are absent (a report with no
    citations) the average covers the six dimensions only. Computed in
    Decimal so table-precision inputs aggregate exactly.
    """
    components = []
    if correctness is not None:
        components.append(Decimal(str(correctness)) * 10)
    if faithfulness is not None:
        components.append(Decimal(str(faithfulness)) * 10)
    for dim in DIMENSIONS:
        components.append(Decimal(str(dimension_means[dim])))
    return float(sum(components) / len(components))
