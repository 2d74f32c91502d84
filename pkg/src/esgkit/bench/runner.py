"""Benchmark runner: one agent run per question, results persisted on disk.

Each question gets a fresh gateway and tool registry so nothing leaks
between questions and replay transcripts stay aligned. A run directory
looks like:

    runs/<run_id>/
      manifest.json          what ran, with which config and ablations
      answers.jsonl          one record per question, input order
      work/<qid>/            agent scratch space, trace.jsonl, artifacts
      reports/<qid>/         report.md for level-3 questions
      eval/summary.csv       closed-question accuracy by level
"""

from __future__ import annotations

import datetime as dt
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

from ..agent import AgentConfig, Orchestrator
from ..agent.trace import RunOutcome
from ..errors import EsgkitError
from ..evaluation.grading import (
    AccuracySummary,
    GradedAnswer,
    accuracy_summary,
    grade_closed,
)
from ..gateway import (
    HttpChatProvider,
    ModelGateway,
    ReplayProvider,
    RoleBinding,
)
from ..tools import build_default_registry
from .questions import Question


@dataclass
class QuestionResult:
    question: Question
    outcome: RunOutcome
    correct: bool | None  # None when the question is not graded mechanically

    def answer_record(self) -> dict:
        return {
            "question_id": self.question.question_id,
            "level": self.question.level,
            "type": self.question.qtype,
            "final_answer": self.outcome.final_answer,
            "status": self.outcome.status,
            "correct": self.correct,
            "steps": self.outcome.n_steps,
            "prompt_tokens": self.outcome.usage.prompt_tokens,
            "completion_tokens": self.outcome.usage.completion_tokens,
            "duration_ms": self.outcome.duration_ms,
            "error": self.outcome.error,
        }


@dataclass
class BenchmarkRun:
    run_id: str
    run_dir: Path
    results: list[QuestionResult]
    summary: AccuracySummary
    manifest: dict

    @property
    def n_errors(self) -> int:
        return sum(1 for r in self.results if r.outcome.status == "error")


class _LockedSandbox:
    """Serializes sandbox access when questions run in parallel; the
    runner process speaks one sequential line protocol."""

    def __init__(self, inner):
        self._inner = inner
        self._lock = threading.Lock()

    def is_available(self) -> bool:
        return self._inner.is_available()

    def execute(self, *args, **kwargs):
        with self._lock:
            return self._inner.execute(*args, **kwargs)


def build_provider(config: AgentConfig, replay: str | Path | None,
                   question_id: str):
    kind = str(config.provider.get("kind", "replay"))
    if kind == "replay":
        if replay is None:
            raise ValueError(
                "the replay provider needs a transcript path (--replay)")
        path = Path(replay)
        if path.is_dir():
            path = path / f"{question_id}.jsonl"
        if not path.is_file():
            raise FileNotFoundError(
                f"no replay transcript for question {question_id!r}: {path}")
        return ReplayProvider.from_path(path)
    if kind == "http":
        base_url = config.provider.get("base_url")
        if not base_url:
            raise ValueError("the http provider needs provider.base_url")
        return HttpChatProvider(base_url)
    raise ValueError(f"unknown provider kind {kind!r}")


def build_gateway(config: AgentConfig, replay: str | Path | None,
                  question_id: str) -> ModelGateway:
    """One provider per question, shared by every role, so a scripted
    transcript covers main, sub-agent, and judge calls in strict order."""
    provider = build_provider(config, replay, question_id)
    bindings = {
        role: RoleBinding(provider, model_id)
        for role, model_id in config.role_models.items()
    }
    return ModelGateway(bindings)


def _package_version() -> str:
    try:
        return metadata.version("esgkit")
    except metadata.PackageNotFoundError:
        return "unknown"


def _error_outcome(question: Question, message: str) -> RunOutcome:
    return RunOutcome(
        question_id=question.question_id,
        query=question.text,
        status="error",
        error=message,
    )


def run_one(question: Question, config: AgentConfig, run_dir: Path, *,
            replay=None, index=None, search=None, sandbox=None,
            ablate: set[str] = frozenset()) -> QuestionResult:
    work = run_dir / "work" / question.question_id
    reports = run_dir / "reports" / question.question_id
    try:
        gateway = build_gateway(config, replay, question.question_id)
        registry = build_default_registry(
            disabled=set(config.disabled_tools) | set(ablate))
        orchestrator = Orchestrator(gateway, registry, config,
                                    index=index, search=search,
                                    sandbox=sandbox)
        outcome = orchestrator.run(
            question.text,
            run_dir=work,
            attachments=list(question.attachments),
            question_id=question.question_id,
            report_dir=reports,
        )
    except (EsgkitError, OSError, ValueError) as exc:
        return QuestionResult(question, _error_outcome(question, str(exc)),
                              correct=None)

    correct = None
    if question.closed:
        try:
            correct = grade_closed(question.qtype, question.answer,
                                   outcome.final_answer)
        except EsgkitError as exc:
            return QuestionResult(
                question,
                _error_outcome(question, f"grading failed: {exc}"),
                correct=None,
            )
    return QuestionResult(question, outcome, correct)


def write_summary_csv(path: Path, summary: AccuracySummary) -> None:
    lines = ["level,n,correct,acc_pct"]
    for label, n, correct, acc in summary.rows():
        lines.append(f"{label},{n},{correct},{acc}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_benchmark(questions: list[Question], config: AgentConfig,
                  run_root: str | Path, *,
                  run_id: str | None = None,
                  replay: str | Path | None = None,
                  index=None, search=None, sandbox=None,
                  ablate: set[str] = frozenset(),
                  parallel: int = 1,
                  observer=None) -> BenchmarkRun:
    """Run every question and persist the results.

    Questions execute independently (optionally in parallel); a failure in
    one becomes an error record, never an aborted run. ``observer`` is
    called with each QuestionResult as it completes, in completion order;
    persisted outputs are always in input order.
    """
    if not questions:
        raise ValueError("no questions to run")
    if parallel < 1:
        raise ValueError("parallel must be at least 1")
    run_id = run_id or dt.datetime.now().strftime("run-%Y%m%d-%H%M%S-") \
        + uuid.uuid4().hex[:6]
    run_dir = Path(run_root) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "eval").mkdir(exist_ok=True)

    if sandbox is not None and parallel > 1:
        sandbox = _LockedSandbox(sandbox)

    results: list[QuestionResult | None] = [None] * len(questions)

    def job(i: int) -> QuestionResult:
        return run_one(questions[i], config, run_dir, replay=replay,
                       index=index, search=search, sandbox=sandbox,
                       ablate=ablate)

    if parallel == 1:
        for i in range(len(questions)):
            results[i] = job(i)
            if observer:
                observer(results[i])
    else:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            futures = {pool.submit(job, i): i for i in range(len(questions))}
            for future in as_completed(futures):
                i = futures[future]
                results[i] = future.result()
                if observer:
                    observer(results[i])
    done: list[QuestionResult] = [r for r in results if r is not None]

    graded = [
        GradedAnswer(r.question.question_id, r.question.level, bool(r.correct))
        for r in done if r.question.closed
    ]
    summary = accuracy_summary(graded)

    manifest = {
        "run_id": run_id,
        "created_at": dt.datetime.now().isoformat(timespec="seconds"),
        "esgkit_version": _package_version(),
        "n_questions": len(questions),
        "levels": sorted({q.level for q in questions}),
        "role_models": dict(config.role_models),
        "step_budgets": dict(config.step_budgets),
        "disabled_tools": sorted(config.disabled_tools),
        "ablated_tools": sorted(ablate),
        "retrieval": {"top_k": config.retrieval_top_k,
                      "mode": config.retrieval_mode},
        "provider": dict(config.provider),
        "replay": str(replay) if replay is not None else None,
        "parallel": parallel,
        "n_errors": sum(1 for r in done if r.outcome.status == "error"),
    }
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    with open(run_dir / "answers.jsonl", "w", encoding="utf-8") as fh:
        for result in done:
            fh.write(json.dumps(result.answer_record()) + "\n")

    if summary.levels:
        write_summary_csv(run_dir / "eval" / "summary.csv", summary)

    return BenchmarkRun(run_id=run_id, run_dir=run_dir, results=done,
                        summary=summary, manifest=manifest)
