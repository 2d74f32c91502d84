"""Result tables, recomputed from persisted records and cross-checked.

The summary csv a run writes is derived data. Before rendering a table we
re-derive the counts from answers.jsonl and compare; a mismatch means the
run directory was edited or the writer regressed, and either way the
table must not be trusted.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import InconsistentCounts
from ..evaluation.grading import AccuracySummary, GradedAnswer, accuracy_summary

_CLOSED = ("tf", "mc", "fib")


def read_answers(run_dir: str | Path) -> list[dict]:
    path = Path(run_dir) / "answers.jsonl"
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def summary_from_answers(records: list[dict]) -> AccuracySummary:
    graded = [
        GradedAnswer(r["question_id"], int(r["level"]), bool(r["correct"]))
        for r in records if r.get("type") in _CLOSED
    ]
    return accuracy_summary(graded)


def check_against_csv(summary: AccuracySummary, csv_path: str | Path) -> None:
    """Compare recomputed counts with a persisted summary.csv."""
    lines = Path(csv_path).read_text(encoding="utf-8").strip().splitlines()
    persisted = {}
    for line in lines[1:]:
        label, n, correct, acc = line.split(",")
        persisted[label] = (int(n), int(correct), float(acc))
    computed = {
        label: (n, correct, acc)
        for label, n, correct, acc in summary.rows()
    }
    if persisted != computed:
        raise InconsistentCounts(
            f"summary.csv disagrees with answers.jsonl: "
            f"persisted={persisted} recomputed={computed}")


def accuracy_markdown(summary: AccuracySummary) -> str:
    lines = [
        "| Level | n | Correct | Accuracy (%) |",
        "| --- | ---: | ---: | ---: |",
    ]
    for label, n, correct, acc in summary.rows():
        name = label if label == "total" else f"Level {label}"
        lines.append(f"| {name} | {n} | {correct} | {acc:.2f} |")
    return "\n".join(lines)


def accuracy_table(run_dir: str | Path) -> str:
    """Markdown accuracy table for a run, verified against its own csv."""
    run_dir = Path(run_dir)
    summary = summary_from_answers(read_answers(run_dir))
    csv_path = run_dir / "eval" / "summary.csv"
    if csv_path.is_file():
        check_against_csv(summary, csv_path)
    elif summary.levels:
        raise InconsistentCounts(
            "answers.jsonl has graded questions but eval/summary.csv is missing")
    return accuracy_markdown(summary)
