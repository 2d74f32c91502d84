"""Per-run state shared across tool invocations."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from ..gateway import ModelGateway
    from ..retrieval import KnowledgeIndex
    from .todo import PlanLedger


@dataclass
class RunContext:
    run_dir: Path
    gateway: "ModelGateway | None" = None
    index: "KnowledgeIndex | None" = None
    search: Any = None  # object with .search(query, filter_year)
    sandbox: Any = None  # object with .execute(code, workdir, timeout_s)
    plan: "PlanLedger | None" = None
    report_dir: Path | None = None  # where the report tool writes; default run_dir
    retrieval_top_k: int = 5
    retrieval_mode: str = "hybrid"
    budgets: dict[str, int] = field(default_factory=dict)
    # general memory: insights the orchestrator distills every few steps
    memory: list = field(default_factory=list)
    # tool-local memory: each tool sees its own prior calls
    tool_history: dict[str, list[tuple[dict, str]]] = field(default_factory=dict)
    invocation_log: list = field(default_factory=list)
    retrieved_uris: list[str] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)
    terminated: bool = False
    final_answer: str | None = None
    final_reasoning: str | None = None

    def __post_init__(self):
        self.run_dir = Path(self.run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        if self.report_dir is None:
            self.report_dir = self.run_dir

    def budget_for(self, tool: str, default: int = 3) -> int:
        return self.budgets.get(tool, default)

    def record_uri(self, uri: str) -> None:
        if uri not in self.retrieved_uris:
            self.retrieved_uris.append(uri)

    def record_artifact(self, path: Path) -> None:
        if path not in self.artifacts:
            self.artifacts.append(path)

    def history(self, tool: str) -> list[tuple[dict, str]]:
        return self.tool_history.get(tool, [])

    def inside_run_dir(self, path: str | Path) -> Path:
        """Resolve a tool-supplied path and require it to stay inside the
        run directory. Relative paths anchor at the run directory."""
        from ..errors import JailViolation

        candidate = Path(path)
        if not candidate.is_absolute():
            candidate = self.run_dir / candidate
        resolved = candidate.resolve()
        root = self.run_dir.resolve()
        if resolved != root and root not in resolved.parents:
            raise JailViolation(f"path escapes the run directory: {path}")
        return resolved
