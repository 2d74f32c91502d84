"""Document ingestion: format extraction, stable ids, titles."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..errors import EmptyDocument, UnsupportedFormat

_HEADING_RE = re.compile(r"^#{1,6}\s+(.+?)\s*$", re.MULTILINE)


def _read_text(path: Path) -> str:
    return path.read_text(encoding="utf-8", errors="replace")


# extension -> text extractor; plain text and markdown ship built in,
# heavier formats register here
EXTRACTORS: dict[str, Callable[[Path], str]] = {
    ".txt": _read_text,
    ".md": _read_text,
    ".markdown": _read_text,
}


def register_extractor(extension: str, fn: Callable[[Path], str]) -> None:
    EXTRACTORS[extension.lower()] = fn


@dataclass
class Document:
    doc_id: str
    source_path: str
    title: str
    body: str
    metadata: dict = field(default_factory=dict)  # company / year / kind


def extract_text(path: str | Path) -> str:
    path = Path(path)
    extractor = EXTRACTORS.get(path.suffix.lower())
    if extractor is None:
        raise UnsupportedFormat(f"no extractor for {path.suffix!r} ({path.name})")
    return extractor(path)


def ingest(path: str | Path, metadata: dict | None = None) -> Document:
    """Turn a source file into a Document.

    The id is a digest of the extracted text, so re-ingesting the same
    content yields the same id regardless of path or mtime.
    """
    path = Path(path)
    body = extract_text(path)
    if not body.strip():
        raise EmptyDocument(f"{path} extracted to empty text")
    doc_id = hashlib.sha256(body.encode("utf-8")).hexdigest()[:12]
    m = _HEADING_RE.search(body)
    title = m.group(1) if m else path.stem
    return Document(
        doc_id=doc_id,
        source_path=str(path),
        title=title,
        body=body,
        metadata=dict(metadata or {}),
    )
