"""Sub-agent result verification with bounded refinement."""

from __future__ import annotations

from dataclasses import dataclass

from ..gateway import ChatMessage, ChatRequest, ModelGateway

_SYSTEM = (
    "You verify whether a sub-agent's result satisfies its task. Reply "
    "with the single word 'satisfied' or 'unsatisfied' plus a short reason."
)


@dataclass
class Verdict:
    satisfied: bool
    reason: str


def verify_step(task: str, result_summary: str, gateway: ModelGateway,
                role: str = "verifier") -> Verdict:
    response = gateway.complete(ChatRequest(
        model_role=role,
        messages=[
            ChatMessage("system", _SYSTEM),
            ChatMessage("user",
                        f"Task: {task}\n\nResult:\n{result_summary}"),
        ],
    ))
    lowered = response.content.casefold()
    # "unsatisfied" contains "satisfied"; an unparseable verdict counts as
    # satisfied so a flaky verifier cannot burn the whole step budget
    satisfied = "unsatisfied" not in lowered
    return Verdict(satisfied=satisfied, reason=response.content.strip())


def should_retry(verdict: Verdict, attempts_left: int) -> bool:
    """Retry iff the verifier was unsatisfied and attempts remain."""
    return not verdict.satisfied and attempts_left > 0
