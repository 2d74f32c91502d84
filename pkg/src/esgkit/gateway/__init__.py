from .embeddings import Embedder, HashingEmbedder
from .gateway import ModelGateway, RoleBinding
from .providers import ChatProvider, HttpChatProvider, ReplayProvider
from .types import ChatMessage, ChatRequest, ChatResponse, Usage

__all__ = [
    "ChatMessage",
    "ChatProvider",
    "ChatRequest",
    "ChatResponse",
    "Embedder",
    "HashingEmbedder",
    "HttpChatProvider",
    "ModelGateway",
    "ReplayProvider",
    "RoleBinding",
    "Usage",
]
