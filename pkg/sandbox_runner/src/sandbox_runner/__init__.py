"""Subprocess sandbox for generated Python code, spoken to over JSONL stdio."""

from .runner import (
    DEFAULT_MEM_LIMIT_MB,
    DEFAULT_TIMEOUT_S,
    ExecRequest,
    ExecResult,
    Runner,
    SpawnError,
    serve,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MEM_LIMIT_MB",
    "DEFAULT_TIMEOUT_S",
    "ExecRequest",
    "ExecResult",
    "Runner",
    "SpawnError",
    "serve",
    "__version__",
]
