"""Chat types shared by providers and the gateway."""

from __future__ import annotations

from dataclasses import dataclass, field

VALID_ROLES = ("system", "user", "assistant", "tool")


@dataclass
class ChatMessage:
    role: str  # one of system / user / assistant / tool
    content: str
    tool_name: str | None = None  # required when role == "tool"

    def __post_init__(self):
        if self.role not in VALID_ROLES:
            raise ValueError(f"invalid message role: {self.role!r}")
        if self.role == "tool" and not self.tool_name:
            raise ValueError("tool messages must carry tool_name")

    def to_dict(self) -> dict:
        d = {"role": self.role, "content": self.content}
        if self.tool_name:
            d["tool_name"] = self.tool_name
        return d


@dataclass
class ChatRequest:
    model_role: str  # logical role, resolved by the gateway ("main", "judge:x", ...)
    messages: list[ChatMessage]
    temperature: float = 0.0
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.model_role:
            raise ValueError("model_role must be non-empty")
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range: {self.temperature}")

    @property
    def last_content(self) -> str:
        return self.messages[-1].content


@dataclass
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(
            prompt_tokens=self.prompt_tokens + other.prompt_tokens,
            completion_tokens=self.completion_tokens + other.completion_tokens,
        )

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass
class ChatResponse:
    content: str
    usage: Usage = field(default_factory=Usage)
    model_id: str = ""
    provider_id: str = ""
