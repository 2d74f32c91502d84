"""Role-routing model gateway with retries and per-role usage accounting.

Agents never talk to providers directly; they name a logical role ("main",
"deep_researcher", "judge:gemini-3-flash") and the gateway resolves it to a
provider binding. Resolution tries the exact role first, then the prefix
before ":", so a family of judge roles can share one binding.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from ..errors import TransientProviderError, UnknownRole
from .providers import ChatProvider
from .types import ChatRequest, ChatResponse, Usage


@dataclass
class RoleBinding:
    provider: ChatProvider
    model_id: str
    temperature: float = 0.0


@dataclass
class _RoleStats:
    usage: Usage = field(default_factory=Usage)
    calls: int = 0


class ModelGateway:
    def __init__(self, bindings: dict[str, RoleBinding], *,
                 retries: int = 3, backoff_s: float = 0.5,
                 sleep: Callable[[float], None] = time.sleep):
        if retries < 1:
            raise ValueError("retries must be >= 1")
        self._bindings = dict(bindings)
        self._retries = retries
        self._backoff_s = backoff_s
        self._sleep = sleep
        self._stats: dict[str, _RoleStats] = {}
        self._lock = threading.Lock()

    def resolve(self, role: str) -> RoleBinding:
        if role in self._bindings:
            return self._bindings[role]
        head = role.split(":", 1)[0]
        if head != role and head in self._bindings:
            return self._bindings[head]
        raise UnknownRole(f"no provider binding for role {role!r}")

    def complete(self, request: ChatRequest) -> ChatResponse:
        binding = self.resolve(request.model_role)
        if request.temperature == 0.0 and binding.temperature:
            request = ChatRequest(
                model_role=request.model_role,
                messages=request.messages,
                temperature=binding.temperature,
                max_tokens=request.max_tokens,
            )
        last_exc: Exception | None = None
        for attempt in range(self._retries):
            try:
                response = binding.provider.complete(request, binding.model_id)
                break
            except TransientProviderError as exc:
                last_exc = exc
                if attempt + 1 < self._retries:
                    self._sleep(self._backoff_s * (2 ** attempt))
        else:
            raise last_exc  # type: ignore[misc]
        with self._lock:
            stats = self._stats.setdefault(request.model_role, _RoleStats())
            stats.usage = stats.usage + response.usage
            stats.calls += 1
        return response

    def usage_total(self, role_filter: str | None = None) -> Usage:
        total = Usage()
        with self._lock:
            for role, stats in self._stats.items():
                if role_filter is None or role == role_filter:
                    total = total + stats.usage
        return total

    def call_total(self, role_filter: str | None = None) -> int:
        with self._lock:
            return sum(
                stats.calls for role, stats in self._stats.items()
                if role_filter is None or role == role_filter
            )

    def roles_seen(self) -> list[str]:
        with self._lock:
            return sorted(self._stats)
