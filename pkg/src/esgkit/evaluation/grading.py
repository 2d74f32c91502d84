"""Closed-question grading: answer normalization and accuracy tables."""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass, field

from ..errors import Unnormalizable
from .rounding import pct

_TRUE_FORMS = {"true", "t", "yes", "y"}
_FALSE_FORMS = {"false", "f", "no", "n"}
# a bare choice letter, optionally wrapped like "(C)", "C.", "C)" or
# followed by the option text after a separator
_MC_RE = re.compile(r"^\(?([a-z])[\).:,]?(?:\s|$)")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str, qtype: str) -> str:
    """Coerce an answer to canonical form for its question type.

    tf -> "true" / "false"; mc -> single lowercase letter; fib -> folded
    free text. Raises Unnormalizable when the text cannot be coerced.
    """
    if text is None:
        raise Unnormalizable("answer is None")
    folded = text.strip().casefold()
    if not folded:
        raise Unnormalizable("answer is empty")
    if qtype == "tf":
        bare = folded.translate(_PUNCT_TABLE).strip()
        if bare in _TRUE_FORMS:
            return "true"
        if bare in _FALSE_FORMS:
            return "false"
        raise Unnormalizable(f"not a truth value: {text!r}")
    if qtype == "mc":
        m = _MC_RE.match(folded)
        if not m:
            raise Unnormalizable(f"not a choice letter: {text!r}")
        return m.group(1)
    if qtype == "fib":
        collapsed = " ".join(folded.split())
        return collapsed.strip("\"'").rstrip(".")
    if qtype == "open":
        return folded
    raise ValueError(f"unknown question type: {qtype}")


def _as_number(text: str) -> float | None:
    try:
        return float(text.replace(",", ""))
    except ValueError:
        return None


def grade_closed(qtype: str, expected: str, given: str | None) -> bool:
    """True iff the given answer matches the expected one.

    Fill-in answers compare numerically when both sides parse as numbers
    ("250" matches "250.0"), otherwise as normalized strings. An answer the
    normalizer rejects grades false rather than erroring; a malformed
    EXPECTED answer is a dataset bug and propagates.
    """
    want = normalize_answer(expected, qtype)
    if given is None:
        return False
    try:
        got = normalize_answer(given, qtype)
    except Unnormalizable:
        return False
    if qtype == "fib":
        a, b = _as_number(want), _as_number(got)
        if a is not None and b is not None:
            return math.isclose(a, b, rel_tol=1e-9)
    return want == got


@dataclass
class LevelAccuracy:
    n: int
    correct: int

    @property
    def acc_pct(self) -> float:
        return pct(self.correct, self.n)


@dataclass
class GradedAnswer:
    question_id: str
    level: int
    correct: bool


@dataclass
class AccuracySummary:
    levels: dict[int, LevelAccuracy] = field(default_factory=dict)

    @property
    def total(self) -> LevelAccuracy:
        return LevelAccuracy(
            n=sum(v.n for v in self.levels.values()),
            correct=sum(v.correct for v in self.levels.values()),
        )

    def rows(self) -> list[tuple[str, int, int, float]]:
        out = [
            (str(level), acc.n, acc.correct, acc.acc_pct)
            for level, acc in sorted(self.levels.items())
        ]
        if self.levels:
            t = self.total
            out.append(("total", t.n, t.correct, t.acc_pct))
        return out


def accuracy_summary(graded: list[GradedAnswer]) -> AccuracySummary:
    """Per-level accuracy plus a pooled total. Levels with no graded
    answers are omitted entirely, never shown as 0/0."""
    summary = AccuracySummary()
    for g in sorted(graded, key=lambda g: g.level):
        acc = summary.levels.setdefault(g.level, LevelAccuracy(0, 0))
        acc.n += 1
        acc.correct += int(g.correct)
    return summary
