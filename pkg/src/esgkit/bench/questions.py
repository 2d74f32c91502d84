"""Benchmark question loading and validation.

Questions live in JSONL, one record per line:

    {"question_id": "L1-001", "level": 1, "type": "tf",
     "question": "Does ACME report scope 3 emissions?", "answer": "true",
     "capabilities": [1, 4], "attachments": ["acme_2024.md"]}

Levels 1 and 2 are closed questions (true/false, multiple choice, fill in
blank) graded mechanically against ``answer``. Level 3 questions are open
report tasks scored by the judge ensemble, so ``answer`` is optional
there. Validation is strict and fails with the offending line number; a
benchmark run should never discover a bad record halfway through.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DuplicateId, MissingAttachment, SchemaError, Unnormalizable
from ..evaluation.grading import normalize_answer

QUESTION_TYPES = ("tf", "mc", "fib", "open")
CLOSED_TYPES = ("tf", "mc", "fib")
LEVELS = (1, 2, 3)

_KNOWN_KEYS = {
    "question_id", "level", "type", "question", "answer",
    "choices", "capabilities", "attachments", "metadata",
}


@dataclass
class Question:
    question_id: str
    level: int
    qtype: str
    text: str
    answer: str | None = None
    choices: list[str] = field(default_factory=list)
    capabilities: list[int] = field(default_factory=list)
    attachments: list[str] = field(default_factory=list)  # resolved paths
    metadata: dict = field(default_factory=dict)

    @property
    def closed(self) -> bool:
        return self.qtype in CLOSED_TYPES


def _as_answer_text(raw) -> str | None:
    if raw is None:
        return None
    if isinstance(raw, bool):
        return "true" if raw else "false"
    if isinstance(raw, (int, float, str)):
        return str(raw)
    return None  # treated as malformed by the caller


def _parse_record(raw: dict, line: int,
                  attachments_root: Path) -> Question:
    qid = raw.get("question_id")
    if not isinstance(qid, str) or not qid.strip():
        raise SchemaError("question_id must be a non-empty string", line)
    qid = qid.strip()

    level = raw.get("level")
    if isinstance(level, bool) or level not in LEVELS:
        raise SchemaError(f"level must be one of {LEVELS}", line)

    qtype = raw.get("type")
    if qtype not in QUESTION_TYPES:
        raise SchemaError(f"type must be one of {QUESTION_TYPES}", line)
    if level == 3 and qtype != "open":
        raise SchemaError("level 3 questions must have type 'open'", line)
    if level != 3 and qtype == "open":
        raise SchemaError("open questions are level 3 only", line)

    text = raw.get("question")
    if not isinstance(text, str) or not text.strip():
        raise SchemaError("question text is required", line)

    answer = _as_answer_text(raw.get("answer"))
    if qtype in CLOSED_TYPES:
        if answer is None or not answer.strip():
            raise SchemaError(
                f"closed question of type {qtype!r} needs an answer", line)
        try:
            normalize_answer(answer, qtype)
        except Unnormalizable as exc:
            raise SchemaError(f"answer does not normalize: {exc}", line)

    choices = raw.get("choices")
    if qtype == "mc":
        if (not isinstance(choices, list) or len(choices) < 2
                or not all(isinstance(c, str) and c.strip() for c in choices)):
            raise SchemaError(
                "mc questions need at least two non-empty choices", line)
    elif choices is not None:
        raise SchemaError("choices are only valid for mc questions", line)

    capabilities = raw.get("capabilities") or []
    if not isinstance(capabilities, list):
        raise SchemaError("capabilities must be a list of integers", line)
    for cap in capabilities:
        if isinstance(cap, bool) or not isinstance(cap, int) \
                or not 1 <= cap <= 10:
            raise SchemaError(
                f"capability ids must be integers in 1..10, got {cap!r}", line)

    attachments = raw.get("attachments") or []
    if not isinstance(attachments, list) \
            or not all(isinstance(a, str) and a.strip() for a in attachments):
        raise SchemaError("attachments must be a list of paths", line)
    resolved = []
    for rel in attachments:
        path = Path(rel)
        if not path.is_absolute():
            path = attachments_root / path
        if not path.is_file():
            raise MissingAttachment(
                f"question {qid}: attachment not found: {path}")
        resolved.append(str(path))

    metadata = dict(raw.get("metadata") or {})
    # tolerate dataset-specific extras (company, theme, ...) as metadata
    for key, value in raw.items():
        if key not in _KNOWN_KEYS:
            metadata.setdefault(key, value)

    return Question(
        question_id=qid,
        level=level,
        qtype=qtype,
        text=text.strip(),
        answer=answer,
        choices=list(choices) if qtype == "mc" else [],
        capabilities=list(capabilities),
        attachments=resolved,
        metadata=metadata,
    )


def load_questions(path: str | Path,
                   attachments_root: str | Path | None = None) -> list[Question]:
    """Load and validate a JSONL question file.

    Attachment paths resolve against ``attachments_root``, defaulting to
    the directory the question file sits in.
    """
    path = Path(path)
    root = Path(attachments_root) if attachments_root else path.parent
    questions: list[Question] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", line_no)
            if not isinstance(raw, dict):
                raise SchemaError("each record must be a JSON object", line_no)
            question = _parse_record(raw, line_no, root)
            if question.question_id in seen:
                raise DuplicateId(
                    f"line {line_no}: duplicate question_id "
                    f"{question.question_id!r}")
            seen.add(question.question_id)
            questions.append(question)
    return questions
