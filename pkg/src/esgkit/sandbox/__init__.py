from .client import ExecOutcome, SandboxClient

__all__ = ["ExecOutcome", "SandboxClient"]
