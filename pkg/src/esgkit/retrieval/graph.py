"""Entity and relation extraction over chunks, plus alias resolution.

Extraction prompts a model per batch of chunks and expects a fenced
``graph`` block with entities and relations. Responses that cannot be
parsed skip their batch; extraction only fails outright when every batch
was unparseable. Resolution then merges aliases of the same real-world
entity ("Apple" / "Apple Inc." / "APPLE INC") under one canonical name.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field

from ..errors import MalformedExtraction
from ..gateway import ChatMessage, ChatRequest, ModelGateway
from .chunking import Chunk

_GRAPH_BLOCK_RE = re.compile(r"```graph\s*\n(.*?)```", re.DOTALL)
_PUNCT_TABLE = str.maketrans(string.punctuation, " " * len(string.punctuation))

# trailing corporate suffixes dropped during normalization, dot-insensitive
CORPORATE_SUFFIXES = {"inc", "corp", "co", "ltd", "plc", "llc", "gmbh", "sa", "ag"}


@dataclass
class EntityNode:
    canonical_name: str
    entity_type: str = "other"  # company / metric / framework / location / other
    aliases: set[str] = field(default_factory=set)
    mention_chunk_ids: set[str] = field(default_factory=set)

    def __post_init__(self):
        self.aliases = set(self.aliases) | {self.canonical_name}


@dataclass
class RelationEdge:
    src: str
    dst: str
    label: str
    evidence_chunk_ids: set[str] = field(default_factory=set)


@dataclass
class GraphExtraction:
    entities: list[EntityNode] = field(default_factory=list)
    relations: list[RelationEdge] = field(default_factory=list)
    skipped_batches: int = 0


def normalize_entity_name(name: str) -> str:
    """Casefold, strip punctuation, drop trailing corporate suffixes."""
    tokens = name.casefold().translate(_PUNCT_TABLE).split()
    while tokens and tokens[-1] in CORPORATE_SUFFIXES:
        tokens.pop()
    return " ".join(tokens)


def resolve_entities(entities: list[EntityNode]) -> list[EntityNode]:
    """Merge entities that share any normalized alias.

    The canonical name is the longest alias (ties broken lexicographically)
    so "Apple Inc." wins over "Apple". An entity whose aliases bridge two
    existing groups joins them. Idempotent: resolving an already resolved
    list changes nothing.
    """
    # union-find over normalized alias keys
    parent: dict[str, str] = {}

    def find(key: str) -> str:
        root = key
        while parent[root] != root:
            root = parent[root]
        while parent[key] != root:
            parent[key], key = root, parent[key]
        return root

    entity_keys: list[set[str]] = []
    for entity in entities:
        keys = {normalize_entity_name(a) for a in entity.aliases}
        keys.discard("")
        entity_keys.append(keys)
        for key in keys:
            parent.setdefault(key, key)
        first = None
        for key in keys:
            if first is None:
                first = key
            else:
                parent[find(key)] = find(first)

    merged: dict[str, EntityNode] = {}
    order: list[str] = []
    for entity, keys in zip(entities, entity_keys):
        if not keys:
            continue
        root = find(next(iter(keys)))
        node = merged.get(root)
        if node is None:
            node = merged[root] = EntityNode(
                canonical_name=entity.canonical_name,
                entity_type=entity.entity_type,
                aliases=set(),
            )
            order.append(root)
        node.aliases |= entity.aliases
        node.mention_chunk_ids |= entity.mention_chunk_ids
        if node.entity_type == "other" and entity.entity_type != "other":
            node.entity_type = entity.entity_type
    out = []
    for root in order:
        node = merged[root]
        node.canonical_name = max(sorted(node.aliases), key=len)
        out.append(node)
    return out


_EXTRACT_SYSTEM = """You extract a knowledge graph from ESG document passages.
Identify named entities (companies, metrics, frameworks, locations) and the
relations between them. Respond with a fenced graph block:

```graph
{"entities": [{"name": "...", "type": "company", "aliases": ["..."]}],
 "relations": [{"src": "...", "dst": "...", "label": "..."}]}
```"""


def _parse_graph_block(content: str) -> dict | None:
    m = _GRAPH_BLOCK_RE.search(content)
    if not m:
        return None
    try:
        payload = json.loads(m.group(1))
    except json.JSONDecodeError:
        return None
    return payload if isinstance(payload, dict) else None


def extract_graph(chunks: list[Chunk], gateway: ModelGateway,
                  role: str = "main", batch_size: int = 8) -> GraphExtraction:
    """One model call per batch of chunks; returns the raw (unresolved)
    entities and relations."""
    extraction = GraphExtraction()
    if not chunks:
        return extraction
    batches = [chunks[i:i + batch_size] for i in range(0, len(chunks), batch_size)]
    parsed_any = False
    for batch in batches:
        passages = "\n\n".join(
            f"[{c.chunk_id}]\n{c.text}" for c in batch
        )
        response = gateway.complete(ChatRequest(
            model_role=role,
            messages=[
                ChatMessage("system", _EXTRACT_SYSTEM),
                ChatMessage("user", f"Passages:\n\n{passages}"),
            ],
        ))
        payload = _parse_graph_block(response.content)
        if payload is None:
            extraction.skipped_batches += 1
            continue
        parsed_any = True
        batch_ids = [c.chunk_id for c in batch]
        folded = {c.chunk_id: c.text.casefold() for c in batch}

        def mentions(aliases: set[str]) -> set[str]:
            hits = {
                cid for cid, text in folded.items()
                if any(a.casefold() in text for a in aliases if a)
            }
            return hits or set(batch_ids)

        for raw in payload.get("entities", []):
            name = str(raw.get("name", "")).strip()
            if not name:
                continue
            aliases = {name} | {str(a) for a in raw.get("aliases", []) if a}
            extraction.entities.append(EntityNode(
                canonical_name=name,
                entity_type=str(raw.get("type", "other") or "other"),
                aliases=aliases,
                mention_chunk_ids=mentions(aliases),
            ))
        for raw in payload.get("relations", []):
            src = str(raw.get("src", "")).strip()
            dst = str(raw.get("dst", "")).strip()
            if not src or not dst:
                continue
            extraction.relations.append(RelationEdge(
                src=src,
                dst=dst,
                label=str(raw.get("label", "related_to") or "related_to"),
                evidence_chunk_ids=mentions({src, dst}),
            ))
    if batches and not parsed_any:
        raise MalformedExtraction(
            f"all {len(batches)} extraction batches were unparseable"
        )
    return extraction
