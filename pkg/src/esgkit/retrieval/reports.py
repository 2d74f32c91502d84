"""Retrieval report writer.

Every retriever invocation persists what it saw, so citation causality can
be traced back to files on disk. Synthesis is deterministic (no model
call): lead sentences of the top passages stitched into a short summary.
"""

from __future__ import annotations

import hashlib
import re
import uuid
from dataclasses import dataclass
from pathlib import Path

from .index import RetrievalHit

_SENTENCE_RE = re.compile(r"(?<=[.?!])\s+")


def _snippet(text: str, limit: int = 240) -> str:
    flat = " ".join(text.split())
    return flat if len(flat) <= limit else flat[: limit - 3] + "..."


def synthesize(query: str, hits: list[RetrievalHit]) -> str:
    if not hits:
        return f"No indexed material matched the query: {query}"
    lines = [
        f"Top passages for \"{query}\" span "
        f"{len({h.doc_id for h in hits})} document(s)."
    ]
    for i, hit in enumerate(hits[:3], start=1):
        lead = _SENTENCE_RE.split(hit.text.strip())[0]
        lines.append(f"{i}. {_snippet(lead, 200)} [{hit.chunk_id}]")
    return "\n".join(lines)


@dataclass
class RetrievalReport:
    query: str
    hits: list[RetrievalHit]
    synthesis: str
    path: Path | None = None


def write_retrieval_report(query: str, hits: list[RetrievalHit],
                           out_dir: str | Path, *,
                           synthesis: str | None = None,
                           titles: dict[str, str] | None = None,
                           nonce: str | None = None) -> RetrievalReport:
    """Write retrieval_<digest>.md into out_dir.

    The digest covers the query plus a per-call nonce, so repeated queries
    never overwrite earlier reports.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nonce = nonce if nonce is not None else uuid.uuid4().hex
    digest = hashlib.sha256(f"{query}|{nonce}".encode("utf-8")).hexdigest()[:8]
    path = out_dir / f"retrieval_{digest}.md"
    body = synthesis if synthesis is not None else synthesize(query, hits)
    titles = titles or {}

    lines = [
        "# Retrieval Report",
        "",
        f"Retrieved {len(hits)} documents for query: {query}",
        "",
        "## Passages",
        "",
    ]
    for i, hit in enumerate(hits, start=1):
        lines.append(f"### [{i}] {hit.chunk_id} (score {hit.score:.4f}, {hit.source})")
        lines.append(f"> {_snippet(hit.text)}")
        lines.append("")
    lines += ["## Synthesis", "", body, "", "## References", ""]
    for i, hit in enumerate(hits, start=1):
        label = titles.get(hit.doc_id, hit.doc_id)
        lines.append(f"[{i}]({hit.uri}) {label}")
    lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")
    return RetrievalReport(query=query, hits=hits, synthesis=body, path=path)
