"""Fixed-window chunking with overlap."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidChunking
from .documents import Document


@dataclass
class Chunk:
    chunk_id: str  # "<doc_id>#<ordinal>"
    doc_id: str
    ordinal: int
    text: str
    embedding: np.ndarray | None = field(default=None, repr=False)


def chunk(document: Document, size: int, overlap: int = 0) -> list[Chunk]:
    """Split a document body into windows of ``size`` characters where
    consecutive windows share ``overlap`` characters.

    Ordinals are dense from 0. With overlap 0 the concatenation of chunk
    texts reconstructs the body exactly; with overlap > 0 dropping the
    first ``overlap`` characters of every chunk after the first does.
    """
    if size <= 0:
        raise InvalidChunking(f"chunk size must be positive, got {size}")
    if overlap < 0 or overlap >= size:
        raise InvalidChunking(f"overlap {overlap} must be in [0, size)")
    body = document.body
    step = size - overlap
    chunks: list[Chunk] = []
    offset = 0
    while offset < len(body):
        # a final window adding nothing beyond the previous one is skipped
        if offset and offset + overlap >= len(body):
            break
        text = body[offset:offset + size]
        ordinal = len(chunks)
        chunks.append(Chunk(
            chunk_id=f"{document.doc_id}#{ordinal:04d}",
            doc_id=document.doc_id,
            ordinal=ordinal,
            text=text,
        ))
        offset += step
    return chunks
