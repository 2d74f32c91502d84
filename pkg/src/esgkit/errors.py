"""Exception taxonomy shared across the package.

Every error raised by public APIs derives from EsgkitError so callers can
catch the whole family at integration boundaries (the benchmark runner does
exactly that to isolate per-question failures).
"""

from __future__ import annotations


class EsgkitError(Exception):
    """Base class for all package errors."""


# --- model gateway ---------------------------------------------------------


class UnknownRole(EsgkitError):
    """No provider binding exists for the requested model role."""


class ProviderError(EsgkitError):
    """A provider failed to produce a completion."""


class TransientProviderError(ProviderError):
    """Transport-level failure worth retrying (timeouts, 5xx)."""


class TranscriptExhausted(ProviderError):
    """Replay transcript ran out of entries or the next entry's guard
    did not match the incoming request."""


class EmptyInput(EsgkitError):
    """An operation received empty text where content is required."""


# --- corpus retrieval ------------------------------------------------------


class UnsupportedFormat(EsgkitError):
    """No extractor is registered for the file extension."""


class EmptyDocument(EsgkitError):
    """Extraction produced no text."""


class InvalidChunking(EsgkitError):
    """Chunk overlap must be smaller than chunk size."""


class MalformedExtraction(EsgkitError):
    """Graph extraction output could not be parsed at all."""


class EmptyIndex(EsgkitError):
    """Retrieval was attempted against an index with no chunks."""


# --- toolset ---------------------------------------------------------------


class ToolError(EsgkitError):
    """Base class for errors surfaced through ToolResult.error."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class DuplicateTool(ToolError):
    pass


class UnknownToolName(ToolError):
    """Registration attempted with a name outside the canonical toolset."""


class UnknownTool(ToolError):
    """Invocation referenced a name that is not registered."""


class ToolDisabled(ToolError):
    pass


class ArgValidation(ToolError):
    """Tool arguments failed schema validation."""


class BackendUnavailable(ToolError):
    """No search backend could serve the query."""


class BudgetExhausted(ToolError):
    """A sub-agent hit its step budget without producing a result."""


class NoArtifact(ToolError):
    """A tool that must produce a file artifact produced none."""


class DanglingCitation(ToolError):
    """Report body cites an index missing from the citation list."""


class UnknownStep(ToolError):
    pass


class DuplicateStep(ToolError):
    pass


class JailViolation(ToolError):
    """Shell command references paths outside the run directory."""


class ExecutionError(ToolError):
    """Sandboxed execution finished with a nonzero exit code."""

    def __init__(self, message: str, exit_code: int | None = None):
        super().__init__(message)
        self.exit_code = exit_code


class SandboxUnavailable(ToolError):
    """No sandbox runner is installed or the process cannot be spawned."""


class SandboxTimeout(ToolError):
    """Sandboxed execution exceeded its wall-clock limit."""


# --- orchestrator ----------------------------------------------------------


class AlreadyTerminated(ToolError):
    """The done tool was invoked after the run already terminated."""


# --- evaluation ------------------------------------------------------------


class Unnormalizable(EsgkitError):
    """An answer string cannot be coerced to the question type's form."""


class NoCitations(EsgkitError):
    """Citation scores are undefined for a report with zero citations."""


class NoJudges(EsgkitError):
    """Ensemble aggregation needs at least one judge's scores."""


class MalformedReport(EsgkitError):
    """Report lacks the structure evaluation depends on."""


class JudgeFormatError(EsgkitError):
    """A judge's response stayed unparseable after one re-ask."""


class BadCapabilityId(EsgkitError):
    """Capability ids must fall in 1..10."""


# --- benchmark harness -----------------------------------------------------


class SchemaError(EsgkitError):
    """A question record violates the schema. Carries the 1-based line."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateId(EsgkitError):
    pass


class MissingAttachment(EsgkitError):
    pass


class MissingReport(EsgkitError):
    """A level-3 outcome has no report to evaluate."""


class InconsistentCounts(EsgkitError):
    """Persisted per-question outcomes disagree with summary counts."""
