"""Web search backends and the web_search tool.

Offline runs use a fixture backend: a JSONL file of canned result sets
keyed by case-insensitive substring match against the query. A live
backend can be plugged in through the same interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ArgValidation, BackendUnavailable
from .context import RunContext
from .registry import ToolCall, ToolResult


@dataclass
class SearchResult:
    title: str
    url: str
    snippet: str
    year: int | None = None


class FixtureSearchBackend:
    """Canned results: one JSONL entry per key.

        {"key": "GRI 101", "results": [{"title": ..., "url": ...,
                                        "snippet": ..., "year": 2024}]}

    The first entry whose key is a substring of the query (case folded)
    serves the results. No matching entry means the backend cannot answer
    at all, which is distinct from a matching entry with zero results.
    """

    def __init__(self, entries: list[dict]):
        self._entries = []
        for entry in entries:
            self._entries.append((
                str(entry["key"]).casefold(),
                [SearchResult(
                    title=r.get("title", ""),
                    url=r.get("url", ""),
                    snippet=r.get("snippet", ""),
                    year=r.get("year"),
                ) for r in entry.get("results", [])],
            ))

    @classmethod
    def from_path(cls, path: str | Path) -> "FixtureSearchBackend":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(json.loads(line))
        return cls(entries)

    def search(self, query: str, filter_year: int | None = None,
               max_results: int = 8) -> list[SearchResult]:
        folded = query.casefold()
        for key, results in self._entries:
            if key in folded:
                if filter_year is not None:
                    # unknown years are not mismatches
                    results = [r for r in results
                               if r.year is None or r.year == filter_year]
                return results[:max_results]
        raise BackendUnavailable(f"no fixture entry matches query: {query!r}")


def format_results(results: list[SearchResult]) -> str:
    if not results:
        return "Search returned no results."
    lines = []
    for i, r in enumerate(results, start=1):
        year = f" ({r.year})" if r.year is not None else ""
        lines.append(f"{i}. {r.title}{year}\n   {r.url}\n   {r.snippet}")
    return "\n".join(lines)


def tool_web_search(call: ToolCall, context: RunContext) -> ToolResult:
    if context.search is None:
        raise BackendUnavailable("no search backend configured")
    query = call.args["query"].strip()
    if not query:
        raise ArgValidation("web_search: query is empty")
    results = context.search.search(query, call.args.get("filter_year"))
    for r in results:
        if r.url:
            context.record_uri(r.url)
    return ToolResult(
        ok=True,
        summary=format_results(results),
        data={"results": [vars(r) for r in results]},
    )
