"""Embedding interface and the deterministic hashing stub.

The stub hashes casefolded word tokens and character trigrams into a fixed
256-dim vector. hashlib is used instead of the built-in hash() because the
latter is salted per process and would break bit-identical reruns.
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol, Sequence

import numpy as np

from ..errors import EmptyInput

_WORD_RE = re.compile(r"\w+", re.UNICODE)


class Embedder(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        ...


def _features(text: str):
    folded = text.casefold()
    for word in _WORD_RE.findall(folded):
        yield "w:" + word
    padded = f"  {folded} "
    for i in range(len(padded) - 2):
        yield "g:" + padded[i:i + 3]


class HashingEmbedder:
    """Deterministic stand-in for a real embedding model."""

    def __init__(self, dimension: int = 256):
        if dimension < 8:
            raise ValueError("dimension too small to be useful")
        self.dimension = dimension

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            raise EmptyInput("no texts to embed")
        out = []
        for text in texts:
            if not text or not text.strip():
                raise EmptyInput("cannot embed empty text")
            out.append(self._embed_one(text))
        return out

    def _embed_one(self, text: str) -> np.ndarray:
        acc = np.zeros(self.dimension, dtype=np.float64)
        for feat in _features(text):
            digest = hashlib.blake2b(feat.encode("utf-8"), digest_size=8).digest()
            h = int.from_bytes(digest, "little")
            idx = h % self.dimension
            sign = 1.0 if (h >> 63) & 1 else -1.0
            acc[idx] += sign
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:
            # pathological but possible for adversarial inputs; pin a stable
            # unit vector derived from the text so the invariant (unit norm)
            # still holds
            digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
            acc[int.from_bytes(digest, "little") % self.dimension] = 1.0
            norm = 1.0
        return (acc / norm).astype(np.float32)
