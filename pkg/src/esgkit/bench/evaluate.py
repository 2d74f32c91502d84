"""Level-3 report evaluation over a finished benchmark run.

Works entirely from the run directory: the report under reports/<qid>/,
plus the retrieval and research artifacts under work/<qid>/ that
establish which sources the run actually touched. Citation judging and
rubric judging both go through the gateway, so a replay transcript per
question makes the whole evaluation reproducible.

Per question the transcript order is fixed: one support call per citation
with a resolvable reference (body order), then one rubric call per judge
role (config order), plus at most one re-ask after an invalid rubric
response.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..agent import AgentConfig
from ..errors import MalformedReport, MissingReport, NoCitations
from ..evaluation.citations import (
    CitationScores,
    citation_scores,
    extract_citations,
    judge_citation,
)
from ..evaluation.judging import (
    DIMENSIONS,
    JudgeScores,
    ensemble_mean,
    judge_dimensions,
    overall_average,
)
from ..evaluation.reportstats import ReportStats, report_statistics
from ..evaluation.rounding import round_half_up
from ..gateway import ModelGateway
from .questions import Question
from .runner import build_gateway

_REF_LINE_RE = re.compile(r"^\[(\d+)\]\(([^)]+)\)\s*(.*)$", re.MULTILINE)
_PASSAGE_RE = re.compile(
    r"^### \[\d+\] (\S+) \([^)]*\)\n> (.*)$", re.MULTILINE)

SCORE_COLUMNS = ("rich", "comp", "depth", "coh", "prof", "expr")


@dataclass
class Level3Result:
    question_id: str
    per_judge: list[JudgeScores]
    ensemble: dict[str, float]
    citations: CitationScores | None
    overall: float
    stats: ReportStats
    malformed_report: bool = False


def collect_run_evidence(work_dir: str | Path) -> tuple[set[str], dict[str, str]]:
    """Scan a question's work directory for the sources the run touched.

    Returns the set of uris the run retrieved or fetched (the causality
    set) and a uri -> evidence-text map for support judging. Retrieval
    reports map each chunk uri to its quoted passage; research reports
    map every fetched url to the findings body.
    """
    uris: set[str] = set()
    evidence: dict[str, str] = {}
    work_dir = Path(work_dir)
    if not work_dir.is_dir():
        return uris, evidence

    for path in sorted(work_dir.rglob("retrieval_*.md")):
        text = path.read_text(encoding="utf-8")
        for chunk_id, passage in _PASSAGE_RE.findall(text):
            evidence.setdefault(f"doc://{chunk_id}", passage)
        for _, uri, _ in _REF_LINE_RE.findall(text):
            uris.add(uri)

    for path in sorted(work_dir.rglob("research_*.md")):
        text = path.read_text(encoding="utf-8")
        body = text.split("## References")[0].strip()
        for _, uri, _ in _REF_LINE_RE.findall(text):
            uris.add(uri)
            evidence.setdefault(uri, body)

    return uris, evidence


def evaluate_report(markdown: str, work_dir: str | Path,
                    gateway: ModelGateway, config: AgentConfig, *,
                    question_id: str = "") -> Level3Result:
    stats = report_statistics(markdown)
    available_uris, evidence = collect_run_evidence(work_dir)

    malformed = False
    citations = None
    try:
        instances = extract_citations(markdown)
    except MalformedReport:
        malformed = True
        instances = []
    judgments = [
        judge_citation(
            instance,
            evidence.get(instance.uri or "", ""),
            available_uris,
            gateway,
            judge_role=config.effective_citation_judge(),
        )
        for instance in instances
    ]
    try:
        citations = citation_scores(judgments)
    except NoCitations:
        citations = None

    per_judge = [
        judge_dimensions(markdown, gateway, role)
        for role in config.judge_roles
    ]
    means = ensemble_mean(per_judge)
    overall = overall_average(
        means,
        correctness=citations.correctness if citations else None,
        faithfulness=citations.faithfulness if citations else None,
    )
    return Level3Result(
        question_id=question_id,
        per_judge=per_judge,
        ensemble=means,
        citations=citations,
        overall=overall,
        stats=stats,
        malformed_report=malformed,
    )


def _fmt(value: float | None) -> str:
    return "" if value is None else str(round_half_up(value, 3))


def _score_rows(result: Level3Result) -> list[str]:
    rows = []
    for js in result.per_judge:
        dims = [js.scores[d] for d in DIMENSIONS]
        row = [result.question_id, js.judge]
        row += [_fmt(v) for v in dims]
        row += ["", "", _fmt(overall_average(js.scores))]
        rows.append(",".join(row))
    corr = result.citations.correctness if result.citations else None
    faith = result.citations.faithfulness if result.citations else None
    row = [result.question_id, "ensemble"]
    row += [_fmt(result.ensemble[d]) for d in DIMENSIONS]
    row += [_fmt(corr), _fmt(faith), _fmt(result.overall)]
    rows.append(",".join(row))
    return rows


def write_level3_csv(path: str | Path, results: list[Level3Result]) -> None:
    header = "question_id,judge," + ",".join(SCORE_COLUMNS) + ",corr,faith,overall"
    lines = [header]
    for result in results:
        lines.extend(_score_rows(result))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def evaluate_level3(run_dir: str | Path, questions: list[Question],
                    config: AgentConfig, *,
                    replay: str | Path | None = None) -> list[Level3Result]:
    """Evaluate every level-3 question of a finished run.

    Writes eval/level3_scores.csv with one row per judge per question plus
    an ensemble row carrying the citation metrics and the blended overall
    score. A missing report fails the evaluation outright; running the
    benchmark first is a precondition, not a recoverable state.
    """
    run_dir = Path(run_dir)
    results = []
    for question in questions:
        if question.level != 3:
            continue
        report_path = run_dir / "reports" / question.question_id / "report.md"
        if not report_path.is_file():
            raise MissingReport(
                f"question {question.question_id}: no report at {report_path}")
        gateway = build_gateway(config, replay, question.question_id)
        results.append(evaluate_report(
            report_path.read_text(encoding="utf-8"),
            run_dir / "work" / question.question_id,
            gateway,
            config,
            question_id=question.question_id,
        ))
    if results:
        (run_dir / "eval").mkdir(exist_ok=True)
        write_level3_csv(run_dir / "eval" / "level3_scores.csv", results)
    return results
