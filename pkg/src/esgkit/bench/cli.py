"""Command line interface.

    esgkit ingest    --docs corpus/ --out index/
    esgkit ask       --question "..." --replay t.jsonl --run-dir out/
    esgkit run-bench --questions q.jsonl --replay runs/ --run-root runs/
    esgkit evaluate  --run-dir runs/<id> --questions q.jsonl --replay j/
    esgkit stats     --report report.md
    esgkit caps      --questions q.jsonl

Exit codes: 0 success, 1 one or more questions failed at runtime, 2 usage
errors (bad arguments, unreadable or invalid input files).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..agent import AgentConfig, Orchestrator, load_config
from ..errors import EsgkitError
from ..evaluation.capabilities import capability_distribution
from ..evaluation.reportstats import report_statistics
from ..evaluation.rounding import round_half_up
from ..gateway import HashingEmbedder
from ..retrieval.documents import ingest
from ..retrieval.index import KnowledgeIndex
from ..sandbox import SandboxClient
from ..tools import build_default_registry
from ..tools.web import FixtureSearchBackend
from ..evaluation.judging import DIMENSIONS
from .evaluate import SCORE_COLUMNS, evaluate_level3
from .questions import load_questions
from .runner import build_gateway, run_benchmark
from .tables import accuracy_markdown

DOC_PATTERNS = ("*.txt", "*.md", "*.markdown")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esgkit",
        description="ESG analysis agent and benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a knowledge index from documents")
    p.add_argument("--docs", required=True, help="directory of .txt/.md files")
    p.add_argument("--out", required=True, help="index output directory")
    p.add_argument("--config", help="agent config yaml")

    p = sub.add_parser("ask", help="answer one question")
    p.add_argument("--question", required=True)
    p.add_argument("--run-dir", required=True)
    p.add_argument("--config", help="agent config yaml")
    p.add_argument("--replay", help="replay transcript (file)")
    p.add_argument("--index", help="saved knowledge index directory")
    p.add_argument("--fixtures", help="web search fixtures jsonl")
    p.add_argument("--ablate", action="append", default=[],
                   help="disable a tool (repeatable)")

    p = sub.add_parser("run-bench", help="run the benchmark")
    p.add_argument("--questions", required=True)
    p.add_argument("--run-root", required=True)
    p.add_argument("--run-id")
    p.add_argument("--config", help="agent config yaml")
    p.add_argument("--replay",
                   help="replay transcript file, or directory of <qid>.jsonl")
    p.add_argument("--index", help="saved knowledge index directory")
    p.add_argument("--fixtures", help="web search fixtures jsonl")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--ablate", action="append", default=[],
                   help="disable a tool (repeatable)")

    p = sub.add_parser("evaluate", help="judge level-3 reports of a run")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--config", help="agent config yaml")
    p.add_argument("--replay",
                   help="replay transcript file, or directory of <qid>.jsonl")

    p = sub.add_parser("stats", help="descriptive statistics of a report")
    p.add_argument("--report", required=True)

    p = sub.add_parser("caps", help="capability tagging statistics")
    p.add_argument("--questions", required=True)

    return parser


def _load_agent_config(path: str | None) -> AgentConfig:
    return load_config(path) if path else AgentConfig()


def _load_index(path: str | None):
    if not path:
        return None
    return KnowledgeIndex.load(path, HashingEmbedder())


def _load_search(path: str | None):
    if not path:
        return None
    return FixtureSearchBackend.from_path(path)


def _cmd_ingest(args) -> int:
    config = _load_agent_config(args.config)
    docs_dir = Path(args.docs)
    if not docs_dir.is_dir():
        print(f"error: not a directory: {docs_dir}", file=sys.stderr)
        return 2
    paths = sorted(p for pattern in DOC_PATTERNS
                   for p in docs_dir.rglob(pattern))
    if not paths:
        print(f"error: no documents under {docs_dir}", file=sys.stderr)
        return 2
    index = KnowledgeIndex(HashingEmbedder(), chunk_size=config.chunk_size,
                           chunk_overlap=config.chunk_overlap)
    for path in paths:
        index.add_document(ingest(path))
    index.build()
    index.save(args.out)
    print(f"indexed {len(index.documents)} documents, "
          f"{len(index.chunks)} chunks -> {args.out}")
    return 0


def _sandbox_or_none() -> SandboxClient | None:
    client = SandboxClient()
    return client if client.is_available() else None


def _cmd_ask(args) -> int:
    config = _load_agent_config(args.config)
    gateway = build_gateway(config, args.replay, "ask")
    registry = build_default_registry(
        disabled=set(config.disabled_tools) | set(args.ablate))
    sandbox = _sandbox_or_none()
    try:
        orchestrator = Orchestrator(
            gateway, registry, config,
            index=_load_index(args.index),
            search=_load_search(args.fixtures),
            sandbox=sandbox,
        )
        outcome = orchestrator.run(args.question, run_dir=args.run_dir)
    finally:
        if sandbox is not None:
            sandbox.close()
    print(f"status: {outcome.status}")
    print(f"steps: {outcome.n_steps}")
    if outcome.final_answer is not None:
        print(f"answer: {outcome.final_answer}")
    if outcome.error:
        print(f"error: {outcome.error}", file=sys.stderr)
    return 0 if outcome.status == "done" else 1


def _cmd_run_bench(args) -> int:
    config = _load_agent_config(args.config)
    questions = load_questions(args.questions)
    if not questions:
        print("error: the questions file is empty", file=sys.stderr)
        return 2
    sandbox = _sandbox_or_none()
    try:
        run = run_benchmark(
            questions, config, args.run_root,
            run_id=args.run_id,
            replay=args.replay,
            index=_load_index(args.index),
            search=_load_search(args.fixtures),
            sandbox=sandbox,
            ablate=set(args.ablate),
            parallel=args.parallel,
        )
    finally:
        if sandbox is not None:
            sandbox.close()
    print(f"run: {run.run_dir}")
    if run.summary.levels:
        print(accuracy_markdown(run.summary))
    if run.n_errors:
        print(f"{run.n_errors} question(s) failed", file=sys.stderr)
        return 1
    return 0


def _cmd_evaluate(args) -> int:
    config = _load_agent_config(args.config)
    questions = load_questions(args.questions)
    results = evaluate_level3(args.run_dir, questions, config,
                              replay=args.replay)
    if not results:
        print("no level-3 questions in this benchmark")
        return 0
    print("question_id,overall," + ",".join(SCORE_COLUMNS))
    for result in results:
        dims = ",".join(str(round_half_up(result.ensemble[d], 3))
                        for d in DIMENSIONS)
        print(f"{result.question_id},{round_half_up(result.overall, 3)},{dims}")
    print(f"scores written to {Path(args.run_dir) / 'eval' / 'level3_scores.csv'}")
    return 0


def _cmd_stats(args) -> int:
    path = Path(args.report)
    if not path.is_file():
        print(f"error: no such report: {path}", file=sys.stderr)
        return 2
    stats = report_statistics(path.read_text(encoding="utf-8"))
    print(f"words: {stats.word_count}")
    print(f"charts: {stats.chart_count}")
    print(f"references: {stats.reference_count}")
    print(f"citations: {stats.citation_count}")
    return 0


def _cmd_caps(args) -> int:
    questions = load_questions(args.questions)
    tagged = [(q.level, q.capabilities) for q in questions if q.capabilities]
    if not tagged:
        print("no capability-tagged questions")
        return 0
    dist = capability_distribution(tagged)
    print("level," + ",".join(f"c{i}" for i in range(1, 11)) + ",avg")
    for level in sorted(dist.frequencies):
        freqs = ",".join(str(v) for v in dist.frequencies[level])
        avg = round_half_up(dist.avg_capabilities[level], 2)
        print(f"{level},{freqs},{avg}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "ask": _cmd_ask,
    "run-bench": _cmd_run_bench,
    "evaluate": _cmd_evaluate,
    "stats": _cmd_stats,
    "caps": _cmd_caps,
}

# input validation failures are usage errors (exit 2); failures while
# running or judging are runtime errors (exit 1)
_USAGE_ERRORS = ("SchemaError", "DuplicateId", "MissingAttachment")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EsgkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if type(exc).__name__ in _USAGE_ERRORS else 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
