"""Agent configuration and the YAML config file loader."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

DEFAULT_MODEL = "gemini-3-flash-preview"

DEFAULT_ROLE_MODELS = {
    "main": DEFAULT_MODEL,
    "deep_researcher": DEFAULT_MODEL,
    "deep_analyzer": DEFAULT_MODEL,
    "plotter": DEFAULT_MODEL,
    "reformulator": DEFAULT_MODEL,
    "memory": DEFAULT_MODEL,
    "verifier": DEFAULT_MODEL,
    "judge": DEFAULT_MODEL,
}

DEFAULT_STEP_BUDGETS = {
    "main": 50,
    "deep_researcher": 3,
    "deep_analyzer": 3,
}


@dataclass
class AgentConfig:
    role_models: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_ROLE_MODELS))
    step_budgets: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_STEP_BUDGETS))
    disabled_tools: set[str] = field(default_factory=set)
    retrieval_top_k: int = 5
    retrieval_mode: str = "hybrid"
    chunk_size: int = 1200
    chunk_overlap: int = 200
    memory_every: int = 10  # distill general memory every N main steps; 0 off
    memory_max_insights: int = 5
    verify_subagents: bool = False
    refine_retries: int = 2
    question_timeout_s: float = 600.0
    judge_roles: list[str] = field(default_factory=lambda: ["judge"])
    citation_judge: str = ""  # defaults to the first judge role
    provider: dict = field(default_factory=lambda: {"kind": "replay"})

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.step_budgets.get("main", 0) < 1:
            raise ValueError("main step budget must be at least 1")
        for tool, budget in self.step_budgets.items():
            if budget < 1:
                raise ValueError(f"step budget for {tool} must be positive")
        if self.memory_every < 0 or self.refine_retries < 0:
            raise ValueError("memory_every and refine_retries must be >= 0")
        if self.retrieval_top_k < 1:
            raise ValueError("retrieval_top_k must be positive")
        if self.retrieval_mode not in ("vector", "hybrid"):
            raise ValueError(f"unknown retrieval mode {self.retrieval_mode!r}")
        if not self.judge_roles:
            raise ValueError("at least one judge role is required")

    @property
    def main_budget(self) -> int:
        return self.step_budgets["main"]

    def effective_citation_judge(self) -> str:
        return self.citation_judge or self.judge_roles[0]


def load_config(path: str | Path | None = None) -> AgentConfig:
    """Build a config from a YAML file; missing sections keep defaults."""
    if path is None:
        return AgentConfig()
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    config = AgentConfig()

    roles = raw.get("roles") or {}
    config.role_models.update({str(k): str(v) for k, v in roles.items()})
    budgets = raw.get("budgets") or {}
    config.step_budgets.update({str(k): int(v) for k, v in budgets.items()})

    tools = raw.get("tools") or {}
    config.disabled_tools |= {str(t) for t in tools.get("disabled") or []}

    retrieval = raw.get("retrieval") or {}
    config = replace(
        config,
        retrieval_top_k=int(retrieval.get("top_k", config.retrieval_top_k)),
        retrieval_mode=str(retrieval.get("mode", config.retrieval_mode)),
        chunk_size=int(retrieval.get("chunk_size", config.chunk_size)),
        chunk_overlap=int(retrieval.get("chunk_overlap", config.chunk_overlap)),
    )

    memory = raw.get("memory") or {}
    verification = raw.get("verification") or {}
    limits = raw.get("limits") or {}
    config = replace(
        config,
        memory_every=int(memory.get("every", config.memory_every)),
        memory_max_insights=int(memory.get("max_insights",
                                           config.memory_max_insights)),
        verify_subagents=bool(verification.get("enabled",
                                               config.verify_subagents)),
        refine_retries=int(verification.get("retries", config.refine_retries)),
        question_timeout_s=float(limits.get("question_timeout_s",
                                            config.question_timeout_s)),
    )

    judges = raw.get("judges") or {}
    if judges.get("roles"):
        config.judge_roles = [str(r) for r in judges["roles"]]
    if judges.get("citation_judge"):
        config.citation_judge = str(judges["citation_judge"])

    if raw.get("provider"):
        config.provider = dict(raw["provider"])

    config.validate()
    return config
