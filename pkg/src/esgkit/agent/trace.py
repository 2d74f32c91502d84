"""Run traces: one record per main-loop step, JSONL on disk."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..gateway import Usage


@dataclass
class TraceStep:
    index: int
    role: str = "main"
    thinking: str = ""
    tool_call: dict | None = None  # {"tool", "args", "call_id"} or None
    ok: bool | None = None  # None when the turn produced no valid call
    output_digest: str = ""
    error: dict | None = None
    note: str = ""  # corrective / verification annotations
    prompt_tokens: int = 0  # step aggregate including nested sub-agent calls
    completion_tokens: int = 0
    duration_ms: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "TraceStep":
        return cls(**raw)


@dataclass
class RunOutcome:
    question_id: str
    query: str
    status: str  # done | budget_exhausted | error
    final_answer: str | None = None
    final_reasoning: str | None = None
    steps: list[TraceStep] = field(default_factory=list)
    usage: Usage = field(default_factory=Usage)
    duration_ms: int = 0
    artifacts: list[str] = field(default_factory=list)
    error: str | None = None
    run_dir: str = ""

    @property
    def n_steps(self) -> int:
        return len(self.steps)


def write_trace(path: str | Path, steps: list[TraceStep]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for step in steps:
            fh.write(json.dumps(step.to_dict()) + "\n")


def read_trace(path: str | Path) -> list[TraceStep]:
    steps = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                steps.append(TraceStep.from_dict(json.loads(line)))
    return steps
