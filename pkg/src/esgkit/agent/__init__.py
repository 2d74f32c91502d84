from .config import (
    DEFAULT_MODEL,
    DEFAULT_ROLE_MODELS,
    DEFAULT_STEP_BUDGETS,
    AgentConfig,
    load_config,
)
from .loop import Orchestrator
from .memory import MemoryEntry, render_memory, synthesize_memory
from .planning import plan
from .trace import RunOutcome, TraceStep, read_trace, write_trace
from .verify import Verdict, should_retry, verify_step

__all__ = [
    "AgentConfig",
    "DEFAULT_MODEL",
    "DEFAULT_ROLE_MODELS",
    "DEFAULT_STEP_BUDGETS",
    "MemoryEntry",
    "Orchestrator",
    "RunOutcome",
    "TraceStep",
    "Verdict",
    "load_config",
    "plan",
    "read_trace",
    "render_memory",
    "should_retry",
    "synthesize_memory",
    "verify_step",
    "write_trace",
]
