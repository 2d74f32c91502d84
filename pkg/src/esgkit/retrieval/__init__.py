from .chunking import Chunk, chunk
from .documents import Document, extract_text, ingest, register_extractor
from .graph import (
    EntityNode,
    GraphExtraction,
    RelationEdge,
    extract_graph,
    normalize_entity_name,
    resolve_entities,
)
from .index import KnowledgeIndex, RetrievalHit
from .reports import RetrievalReport, synthesize, write_retrieval_report

__all__ = [
    "Chunk",
    "Document",
    "EntityNode",
    "GraphExtraction",
    "KnowledgeIndex",
    "RelationEdge",
    "RetrievalHit",
    "RetrievalReport",
    "chunk",
    "extract_graph",
    "extract_text",
    "ingest",
    "normalize_entity_name",
    "register_extractor",
    "resolve_entities",
    "synthesize",
    "write_retrieval_report",
]
