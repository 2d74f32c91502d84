"""The main orchestration loop.

One model turn per step: the model thinks, emits exactly one fenced tool
block, and the result is relayed back. Turns without a valid block still
consume budget and trigger a corrective system message; the run ends when
the done tool fires or the step budget runs out. Sub-agent model calls
happen inside their owning step, so the trace stays dense and bounded by
the main budget while per-role gateway counters expose the nested calls.
"""

from __future__ import annotations

import shutil
import time
from pathlib import Path

from ..errors import EsgkitError
from ..gateway import ChatMessage, ChatRequest, ModelGateway, Usage
from ..tools import (
    PlanLedger,
    RunContext,
    ToolCall,
    ToolRegistry,
    parse_action,
)
from .config import AgentConfig
from .memory import render_memory, synthesize_memory
from .planning import plan as make_plan
from .trace import RunOutcome, TraceStep, write_trace
from .verify import should_retry, verify_step

VERIFIABLE_TOOLS = {"deep_researcher", "deep_analyzer"}

_SYSTEM_TEMPLATE = """You are an ESG analysis agent. Work step by step.

Each turn: think briefly, then emit exactly one fenced tool block, the
fence labeled with the tool name and containing the JSON arguments:

```retriever
{{"query": "...", "top_k": 5}}
```

Available tools:
{tool_lines}

You have at most {budget} steps. When you have the answer, call done with
the final result.
"""


def _tool_lines(registry: ToolRegistry) -> str:
    lines = []
    for name in sorted(registry.names(enabled_only=True)):
        spec = registry.spec(name)
        args = ", ".join(
            f"{arg}{'*' if spec.args[arg].required else ''}"
            for arg in spec.args
        )
        lines.append(f"- {name}({args}): {spec.description}")
    return "\n".join(lines)


class Orchestrator:
    def __init__(self, gateway: ModelGateway, registry: ToolRegistry,
                 config: AgentConfig | None = None, *,
                 index=None, search=None, sandbox=None):
        self.gateway = gateway
        self.registry = registry
        self.config = config or AgentConfig()
        self.index = index
        self.search = search
        self.sandbox = sandbox

    def plan(self, query: str) -> PlanLedger:
        return make_plan(query, self.gateway)

    def run(self, query: str, *, run_dir: str | Path,
            attachments: list[str | Path] = (),
            question_id: str = "",
            report_dir: str | Path | None = None) -> RunOutcome:
        started = time.monotonic()
        usage_start = self.gateway.usage_total()
        config = self.config
        context = RunContext(
            run_dir=Path(run_dir),
            gateway=self.gateway,
            index=self.index,
            search=self.search,
            sandbox=self.sandbox,
            plan=PlanLedger(),
            report_dir=Path(report_dir) if report_dir else None,
            retrieval_top_k=config.retrieval_top_k,
            retrieval_mode=config.retrieval_mode,
            budgets=dict(config.step_budgets),
        )

        attachment_notes = []
        if attachments:
            dest = context.run_dir / "attachments"
            dest.mkdir(exist_ok=True)
            for raw in attachments:
                target = dest / Path(raw).name
                shutil.copy(raw, target)
                attachment_notes.append(f"attachments/{target.name}")

        user_prompt = f"Question: {query}"
        if attachment_notes:
            user_prompt += "\n\nAttached files:\n" + "\n".join(
                f"- {note}" for note in attachment_notes
            )
        messages = [
            ChatMessage("system", _SYSTEM_TEMPLATE.format(
                tool_lines=_tool_lines(self.registry),
                budget=config.main_budget,
            )),
            ChatMessage("user", user_prompt),
        ]

        steps: list[TraceStep] = []
        status = "budget_exhausted"
        error_text = None

        def finish(status_, error_=None):
            write_trace(context.run_dir / "trace.jsonl", steps)
            usage_end = self.gateway.usage_total()
            return RunOutcome(
                question_id=question_id,
                query=query,
                status=status_,
                final_answer=context.final_answer,
                final_reasoning=context.final_reasoning,
                steps=steps,
                usage=Usage(
                    prompt_tokens=usage_end.prompt_tokens - usage_start.prompt_tokens,
                    completion_tokens=(usage_end.completion_tokens
                                       - usage_start.completion_tokens),
                ),
                duration_ms=int((time.monotonic() - started) * 1000),
                artifacts=sorted(str(p) for p in context.artifacts),
                error=error_,
                run_dir=str(context.run_dir),
            )

        def record_step(**kwargs) -> TraceStep:
            step = TraceStep(index=len(steps), **kwargs)
            steps.append(step)
            return step

        def execute(call: ToolCall, thinking: str, note: str = "") -> "tuple":
            """Invoke one tool as one trace step and relay the result."""
            step_started = time.monotonic()
            usage_before = self.gateway.usage_total()
            result = self.registry.invoke(call, context)
            usage_after = self.gateway.usage_total()
            record_step(
                thinking=thinking,
                tool_call={"tool": call.tool, "args": call.args,
                           "call_id": call.call_id},
                ok=result.ok,
                output_digest=result.digest(),
                error=result.error,
                note=note,
                prompt_tokens=usage_after.prompt_tokens - usage_before.prompt_tokens,
                completion_tokens=(usage_after.completion_tokens
                                   - usage_before.completion_tokens),
                duration_ms=int((time.monotonic() - step_started) * 1000),
            )
            if result.ok:
                feedback = result.summary
            else:
                feedback = (f"ERROR {result.error['kind']}: "
                            f"{result.error['message']}")
            messages.append(ChatMessage("tool", feedback, tool_name=call.tool))
            return result

        while len(steps) < config.main_budget:
            if time.monotonic() - started > config.question_timeout_s:
                status, error_text = "error", (
                    f"question timed out after {config.question_timeout_s}s"
                )
                break

            turn_started = time.monotonic()
            usage_before = self.gateway.usage_total()
            try:
                response = self.gateway.complete(ChatRequest(
                    model_role="main", messages=messages,
                ))
            except EsgkitError as exc:
                status = "error"
                error_text = f"{type(exc).__name__}: {exc}"
                break
            usage_after = self.gateway.usage_total()
            turn_usage = Usage(
                prompt_tokens=usage_after.prompt_tokens - usage_before.prompt_tokens,
                completion_tokens=(usage_after.completion_tokens
                                   - usage_before.completion_tokens),
            )
            messages.append(ChatMessage("assistant", response.content))
            action = parse_action(response.content, self.registry.names())

            if action.tool is None or action.args is None:
                record_step(
                    thinking=action.thinking,
                    tool_call=None,
                    ok=None,
                    note=f"malformed turn: {action.problem}",
                    prompt_tokens=turn_usage.prompt_tokens,
                    completion_tokens=turn_usage.completion_tokens,
                    duration_ms=int((time.monotonic() - turn_started) * 1000),
                )
                messages.append(ChatMessage(
                    "system",
                    f"Your last message was not a valid action "
                    f"({action.problem}). Emit exactly one fenced tool "
                    "block labeled with a tool name and containing a JSON "
                    "object of arguments.",
                ))
                continue

            call = ToolCall(tool=action.tool, args=action.args,
                            call_id=f"step_{len(steps):03d}")
            result = execute(call, action.thinking)
            # fold the main turn's own usage into the step just recorded
            steps[-1].prompt_tokens += turn_usage.prompt_tokens
            steps[-1].completion_tokens += turn_usage.completion_tokens

            if context.terminated:
                status = "done"
                break

            if (config.verify_subagents and result.ok
                    and call.tool in VERIFIABLE_TOOLS):
                attempts_left = config.refine_retries
                task = str(call.args.get("task", ""))
                while True:
                    verdict = verify_step(task, result.summary, self.gateway)
                    if verdict.satisfied:
                        steps[-1].note = (steps[-1].note + " verified").strip()
                        break
                    if not should_retry(verdict, attempts_left) \
                            or len(steps) >= config.main_budget:
                        # out of retries: accept the result, flag the step
                        steps[-1].note = (
                            f"verification failed, accepted: {verdict.reason[:200]}"
                        )
                        break
                    attempts_left -= 1
                    retry_call = ToolCall(tool=call.tool, args=dict(call.args),
                                          call_id=f"step_{len(steps):03d}")
                    result = self._retry(retry_call, context, steps, messages,
                                         verdict.reason)
                    if not result.ok:
                        break

            if config.memory_every and len(steps) % config.memory_every == 0:
                window = [
                    f"step {s.index}: "
                    + (s.tool_call["tool"] if s.tool_call else "no action")
                    + (" ok" if s.ok else " failed" if s.ok is False else "")
                    for s in steps[-config.memory_every:]
                ]
                try:
                    entries = synthesize_memory(
                        window, self.gateway,
                        max_insights=config.memory_max_insights,
                    )
                except EsgkitError as exc:
                    status = "error"
                    error_text = f"{type(exc).__name__}: {exc}"
                    break
                if entries:
                    context.memory.extend(entries)
                    messages.append(
                        ChatMessage("system", render_memory(entries))
                    )

        return finish(status, error_text)

    def _retry(self, call: ToolCall, context: RunContext,
               steps: list[TraceStep], messages: list[ChatMessage],
               reason: str):
        step_started = time.monotonic()
        usage_before = self.gateway.usage_total()
        result = self.registry.invoke(call, context)
        usage_after = self.gateway.usage_total()
        step = TraceStep(
            index=len(steps),
            thinking="",
            tool_call={"tool": call.tool, "args": call.args,
                       "call_id": call.call_id},
            ok=result.ok,
            output_digest=result.digest(),
            error=result.error,
            note=f"refinement retry: {reason[:200]}",
            prompt_tokens=usage_after.prompt_tokens - usage_before.prompt_tokens,
            completion_tokens=(usage_after.completion_tokens
                               - usage_before.completion_tokens),
            duration_ms=int((time.monotonic() - step_started) * 1000),
        )
        steps.append(step)
        feedback = result.summary if result.ok else (
            f"ERROR {result.error['kind']}: {result.error['message']}"
        )
        messages.append(ChatMessage("tool", feedback, tool_name=call.tool))
        return result
