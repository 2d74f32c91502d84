"""Chat providers: scripted replay for offline runs, plus a thin HTTP shell.

The replay provider is the workhorse for tests and benchmark reruns. A
transcript is JSONL, one entry per expected completion:

    {"match": "carbon intensity", "response": "...",
     "prompt_tokens": 120, "completion_tokens": 45}

Entries are consumed strictly in order. ``match`` (optional) is a substring
guard checked against the last message of the incoming request; a mismatch
means the conversation diverged from the script and raises
TranscriptExhausted rather than silently serving the wrong entry.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterable, Protocol

from ..errors import ProviderError, TranscriptExhausted, TransientProviderError
from .types import ChatRequest, ChatResponse, Usage


class ChatProvider(Protocol):
    provider_id: str

    def complete(self, request: ChatRequest, model_id: str) -> ChatResponse:
        ...


class ReplayProvider:
    """Serves completions from a scripted transcript, in order."""

    provider_id = "replay"

    def __init__(self, entries: Iterable[dict]):
        self._entries = list(entries)
        self._cursor = 0
        self._lock = threading.Lock()
        for i, entry in enumerate(self._entries):
            if "response" not in entry:
                raise ValueError(f"transcript entry {i} lacks 'response'")

    @classmethod
    def from_path(cls, path: str | Path) -> "ReplayProvider":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return cls(entries)

    @property
    def remaining(self) -> int:
        return len(self._entries) - self._cursor

    @property
    def served(self) -> int:
        return self._cursor

    def complete(self, request: ChatRequest, model_id: str) -> ChatResponse:
        with self._lock:
            if self._cursor >= len(self._entries):
                raise TranscriptExhausted(
                    f"transcript exhausted after {self._cursor} entries "
                    f"(role={request.model_role})"
                )
            entry = self._entries[self._cursor]
            guard = entry.get("match")
            if guard is not None and guard not in request.last_content:
                raise TranscriptExhausted(
                    f"transcript entry {self._cursor} expects {guard!r} in the "
                    f"last message; got {request.last_content[:120]!r}"
                )
            self._cursor += 1
        return ChatResponse(
            content=entry["response"],
            usage=Usage(
                prompt_tokens=int(entry.get("prompt_tokens", 0)),
                completion_tokens=int(entry.get("completion_tokens", 0)),
            ),
            model_id=entry.get("model_id", model_id or "replay"),
            provider_id=self.provider_id,
        )


class HttpChatProvider:
    """Minimal OpenAI-compatible chat provider.

    Never exercised by the offline test suite; exists so a config pointing
    at a live endpoint works without code changes. The API key is read from
    an environment variable, never from config values.
    """

    provider_id = "http"

    def __init__(self, base_url: str, api_key_env: str = "ESGKIT_API_KEY",
                 timeout_s: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s

    def complete(self, request: ChatRequest, model_id: str) -> ChatResponse:
        import requests

        key = os.environ.get(self.api_key_env)
        if not key:
            raise ProviderError(f"environment variable {self.api_key_env} is not set")
        payload = {
            "model": model_id,
            "messages": [m.to_dict() for m in request.messages],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {key}"},
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise TransientProviderError(str(exc)) from exc
        if resp.status_code >= 500:
            raise TransientProviderError(f"server error {resp.status_code}")
        if resp.status_code != 200:
            raise ProviderError(f"provider returned {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        usage = body.get("usage", {})
        return ChatResponse(
            content=body["choices"][0]["message"]["content"],
            usage=Usage(
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            ),
            model_id=body.get("model", model_id),
            provider_id=self.provider_id,
        )
