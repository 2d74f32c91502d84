"""Chunk-level vector index with an optional entity graph on top.

Vector mode is an exact cosine scan over all chunk embeddings. Hybrid mode
keeps the best vector hit first, then pulls in chunks connected to query
entities through the graph (mentions and relation evidence), then fills
with the remaining vector ranking. The graph is what lets a query about
"Apple" surface a chunk that only says "AAPL" if extraction linked them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import EmptyIndex, InvalidChunking
from ..gateway import Embedder, ModelGateway
from .chunking import Chunk, chunk as chunk_document
from .documents import Document
from .graph import (
    EntityNode,
    GraphExtraction,
    RelationEdge,
    extract_graph,
    normalize_entity_name,
    resolve_entities,
)

VECTORS_FILE = "vectors.bin"
DOCS_FILE = "documents.jsonl"
CHUNKS_FILE = "chunks.jsonl"
GRAPH_FILE = "graph.jsonl"
META_FILE = "meta.json"


@dataclass
class RetrievalHit:
    chunk_id: str
    doc_id: str
    score: float
    source: str  # "vector" or "graph"
    text: str

    @property
    def uri(self) -> str:
        return f"doc://{self.chunk_id}"


class KnowledgeIndex:
    def __init__(self, embedder: Embedder, *, chunk_size: int = 1200,
                 chunk_overlap: int = 200):
        if chunk_size <= 0 or not 0 <= chunk_overlap < chunk_size:
            raise InvalidChunking(
                f"chunk_size {chunk_size} with overlap {chunk_overlap}"
            )
        self.embedder = embedder
        self.chunk_size = chunk_size
        self.chunk_overlap = chunk_overlap
        self.documents: dict[str, Document] = {}
        self.chunks: list[Chunk] = []
        self.entities: list[EntityNode] = []
        self.relations: list[RelationEdge] = []
        self._matrix: np.ndarray | None = None
        self._skipped_batches = 0

    # --- construction ------------------------------------------------------

    def add_document(self, document: Document) -> None:
        if document.doc_id in self.documents:
            return  # same content already indexed
        self.documents[document.doc_id] = document
        self.chunks.extend(
            chunk_document(document, self.chunk_size, self.chunk_overlap)
        )
        self._matrix = None

    def build(self) -> "KnowledgeIndex":
        """Embed all chunks. Must run before retrieve; reads after build
        are lock-free since nothing mutates."""
        if self.chunks:
            vectors = self.embedder.embed([c.text for c in self.chunks])
            matrix = np.stack(vectors).astype(np.float32)
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            norms[norms == 0.0] = 1.0
            self._matrix = matrix / norms
            for c, row in zip(self.chunks, self._matrix):
                c.embedding = row
        else:
            self._matrix = np.zeros((0, self.embedder.dimension), dtype=np.float32)
        return self

    def build_graph(self, gateway: ModelGateway, role: str = "main",
                    batch_size: int = 8) -> GraphExtraction:
        extraction = extract_graph(self.chunks, gateway, role, batch_size)
        self._skipped_batches = extraction.skipped_batches
        self.attach_graph(extraction)
        return extraction

    def attach_graph(self, extraction: GraphExtraction) -> None:
        """Resolve entities and remap relations onto canonical names.

        Self-loops created by resolution collapse away; relations whose
        endpoints resolved to nothing are dropped.
        """
        self.entities = resolve_entities(extraction.entities)
        alias_to_canonical: dict[str, str] = {}
        for node in self.entities:
            for alias in node.aliases:
                alias_to_canonical[normalize_entity_name(alias)] = node.canonical_name
        remapped: dict[tuple[str, str, str], RelationEdge] = {}
        for edge in extraction.relations:
            src = alias_to_canonical.get(normalize_entity_name(edge.src))
            dst = alias_to_canonical.get(normalize_entity_name(edge.dst))
            if src is None or dst is None or src == dst:
                continue
            key = (src, dst, edge.label)
            if key in remapped:
                remapped[key].evidence_chunk_ids |= edge.evidence_chunk_ids
            else:
                remapped[key] = RelationEdge(src, dst, edge.label,
                                             set(edge.evidence_chunk_ids))
        self.relations = list(remapped.values())

    # --- retrieval ---------------------------------------------------------

    def _scores(self, query: str) -> np.ndarray:
        qvec = self.embedder.embed([query])[0].astype(np.float32)
        norm = float(np.linalg.norm(qvec))
        if norm:
            qvec = qvec / norm
        return self._matrix @ qvec

    def _query_entities(self, query: str) -> list[EntityNode]:
        folded = query.casefold()
        return [
            node for node in self.entities
            if any(a.casefold() in folded for a in node.aliases if a)
        ]

    def retrieve(self, query: str, top_k: int = 5,
                 mode: str = "vector") -> list[RetrievalHit]:
        if mode not in ("vector", "hybrid"):
            raise ValueError(f"unknown retrieval mode: {mode}")
        if top_k <= 0:
            raise ValueError("top_k must be positive")
        if not self.chunks:
            raise EmptyIndex("index has no chunks")
        if self._matrix is None:
            self.build()
        scores = self._scores(query)
        order = np.argsort(-scores, kind="stable")
        k = min(top_k, len(self.chunks))

        def hit(pos: int, source: str) -> RetrievalHit:
            c = self.chunks[pos]
            return RetrievalHit(
                chunk_id=c.chunk_id,
                doc_id=c.doc_id,
                score=float(scores[pos]),
                source=source,
                text=c.text,
            )

        if mode == "vector":
            return [hit(int(pos), "vector") for pos in order[:k]]

        # hybrid: best vector hit, then graph-connected chunks, then the
        # rest of the vector ranking; first occurrence wins on dedupe
        pos_by_chunk = {c.chunk_id: i for i, c in enumerate(self.chunks)}
        graph_chunk_ids: list[str] = []
        seen_graph: set[str] = set()
        query_entities = self._query_entities(query)
        names = {n.canonical_name for n in query_entities}
        candidates: set[str] = set()
        for node in query_entities:
            candidates |= node.mention_chunk_ids
        for edge in self.relations:
            if edge.src in names or edge.dst in names:
                candidates |= edge.evidence_chunk_ids
        for cid in candidates:
            if cid in pos_by_chunk and cid not in seen_graph:
                seen_graph.add(cid)
                graph_chunk_ids.append(cid)
        graph_chunk_ids.sort(key=lambda cid: -scores[pos_by_chunk[cid]])

        hits: list[RetrievalHit] = []
        used: set[str] = set()

        def push(pos: int, source: str):
            c = self.chunks[pos]
            if c.chunk_id not in used and len(hits) < k:
                used.add(c.chunk_id)
                hits.append(hit(pos, source))

        push(int(order[0]), "vector")
        for cid in graph_chunk_ids:
            push(pos_by_chunk[cid], "graph")
        for pos in order[1:]:
            push(int(pos), "vector")
        return hits

    # --- persistence -------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        if self._matrix is None:
            self.build()
        with open(directory / DOCS_FILE, "w", encoding="utf-8") as fh:
            for doc in self.documents.values():
                fh.write(json.dumps({
                    "doc_id": doc.doc_id,
                    "source_path": doc.source_path,
                    "title": doc.title,
                    "body": doc.body,
                    "metadata": doc.metadata,
                }) + "\n")
        with open(directory / CHUNKS_FILE, "w", encoding="utf-8") as fh:
            for c in self.chunks:
                fh.write(json.dumps({
                    "chunk_id": c.chunk_id,
                    "doc_id": c.doc_id,
                    "ordinal": c.ordinal,
                    "text": c.text,
                }) + "\n")
        with open(directory / VECTORS_FILE, "wb") as fh:
            fh.write(np.uint32(self._matrix.shape[1]).tobytes())
            fh.write(self._matrix.astype("<f4").tobytes())
        with open(directory / GRAPH_FILE, "w", encoding="utf-8") as fh:
            for node in self.entities:
                fh.write(json.dumps({
                    "kind": "entity",
                    "canonical_name": node.canonical_name,
                    "entity_type": node.entity_type,
                    "aliases": sorted(node.aliases),
                    "mention_chunk_ids": sorted(node.mention_chunk_ids),
                }) + "\n")
            for edge in self.relations:
                fh.write(json.dumps({
                    "kind": "relation",
                    "src": edge.src,
                    "dst": edge.dst,
                    "label": edge.label,
                    "evidence_chunk_ids": sorted(edge.evidence_chunk_ids),
                }) + "\n")
        (directory / META_FILE).write_text(json.dumps({
            "chunk_size": self.chunk_size,
            "chunk_overlap": self.chunk_overlap,
            "dimension": int(self._matrix.shape[1]),
            "n_chunks": len(self.chunks),
        }, indent=2))

    @classmethod
    def load(cls, directory: str | Path, embedder: Embedder) -> "KnowledgeIndex":
        directory = Path(directory)
        meta = json.loads((directory / META_FILE).read_text())
        index = cls(embedder, chunk_size=meta["chunk_size"],
                    chunk_overlap=meta["chunk_overlap"])
        with open(directory / DOCS_FILE, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    raw = json.loads(line)
                    index.documents[raw["doc_id"]] = Document(**raw)
        with open(directory / CHUNKS_FILE, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    raw = json.loads(line)
                    index.chunks.append(Chunk(**raw))
        blob = (directory / VECTORS_FILE).read_bytes()
        dim = int(np.frombuffer(blob[:4], dtype="<u4")[0])
        if dim != embedder.dimension:
            raise ValueError(
                f"index dimension {dim} does not match embedder "
                f"dimension {embedder.dimension}"
            )
        matrix = np.frombuffer(blob[4:], dtype="<f4").reshape(-1, dim).copy()
        if matrix.shape[0] != len(index.chunks):
            raise ValueError("vector count does not match chunk count")
        index._matrix = matrix
        for c, row in zip(index.chunks, matrix):
            c.embedding = row
        graph_path = directory / GRAPH_FILE
        if graph_path.exists():
            with open(graph_path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    raw = json.loads(line)
                    if raw.pop("kind") == "entity":
                        index.entities.append(EntityNode(
                            canonical_name=raw["canonical_name"],
                            entity_type=raw["entity_type"],
                            aliases=set(raw["aliases"]),
                            mention_chunk_ids=set(raw["mention_chunk_ids"]),
                        ))
                    else:
                        index.relations.append(RelationEdge(
                            src=raw["src"], dst=raw["dst"], label=raw["label"],
                            evidence_chunk_ids=set(raw["evidence_chunk_ids"]),
                        ))
        return index
