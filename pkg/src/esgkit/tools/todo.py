"""Plan ledger and the todo tool that manipulates it."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ArgValidation, DuplicateStep, UnknownStep
from .context import RunContext
from .registry import ToolCall, ToolResult

VALID_STATUSES = ("pending", "in_progress", "done", "failed")
_FINAL = {"done", "failed"}


@dataclass
class PlanStep:
    step_id: str
    description: str
    priority: str = "medium"
    category: str = ""
    status: str = "pending"
    result: str | None = None


@dataclass
class PlanLedger:
    steps: list[PlanStep] = field(default_factory=list)

    def _find(self, step_id: str) -> PlanStep:
        for step in self.steps:
            if step.step_id == step_id:
                return step
        raise UnknownStep(f"no plan step with id {step_id!r}")

    def add(self, step_id: str, description: str, *,
            priority: str = "medium", category: str = "",
            after_step_id: str | None = None) -> PlanStep:
        if any(s.step_id == step_id for s in self.steps):
            raise DuplicateStep(f"plan step {step_id!r} already exists")
        step = PlanStep(step_id=step_id, description=description,
                        priority=priority, category=category)
        if after_step_id is None:
            self.steps.append(step)
        else:
            anchor = self._find(after_step_id)
            self.steps.insert(self.steps.index(anchor) + 1, step)
        return step

    def start(self, step_id: str) -> PlanStep:
        step = self._find(step_id)
        if step.status != "pending":
            raise ArgValidation(f"step {step_id!r} is {step.status}, not pending")
        step.status = "in_progress"
        return step

    def complete(self, step_id: str, status: str = "done",
                 result: str | None = None) -> PlanStep:
        """Finish a step. Pending steps pass through in_progress so the
        transition history stays pending -> in_progress -> done/failed."""
        if status not in _FINAL:
            raise ArgValidation(f"final status must be done or failed, got {status!r}")
        step = self._find(step_id)
        if step.status in _FINAL:
            raise ArgValidation(f"step {step_id!r} is already {step.status}")
        if step.status == "pending":
            step.status = "in_progress"
        step.status = status
        step.result = result
        return step

    def pending(self) -> list[PlanStep]:
        return [s for s in self.steps if s.status not in _FINAL]

    def to_markdown(self) -> str:
        marks = {"pending": " ", "in_progress": "~", "done": "x", "failed": "!"}
        lines = ["# Plan", ""]
        for step in self.steps:
            lines.append(
                f"- [{marks[step.status]}] {step.step_id}: {step.description} "
                f"(priority: {step.priority})"
            )
        return "\n".join(lines) + "\n"


def _normalize_final_status(raw: str | None) -> str:
    if raw is None:
        return "done"
    lowered = raw.strip().casefold()
    if lowered in ("failed", "failure", "error"):
        return "failed"
    if lowered in ("done", "success", "completed", "complete"):
        return "done"
    raise ArgValidation(f"todo: unknown completion status {raw!r}")


def tool_todo(call: ToolCall, context: RunContext) -> ToolResult:
    if context.plan is None:
        context.plan = PlanLedger()
    plan = context.plan
    action = call.args["action"].strip().casefold()
    step_id = call.args.get("step_id")

    if action == "add":
        task = call.args.get("task")
        if not step_id or not task:
            raise ArgValidation("todo add: step_id and task are required")
        after = call.args.get("after_step_id")
        plan.add(
            step_id, task,
            priority=str(call.args.get("priority") or "medium"),
            category=str(call.args.get("category") or ""),
            after_step_id=after,
        )
        summary = (f"Added step {step_id} after {after}: {task} "
                   f"(priority: {call.args.get('priority') or 'medium'})")
        return ToolResult(ok=True, summary=summary)

    if action == "complete":
        if not step_id:
            raise ArgValidation("todo complete: step_id is required")
        status = _normalize_final_status(call.args.get("status"))
        plan.complete(step_id, status, call.args.get("result"))
        return ToolResult(
            ok=True,
            summary=f"Completed step {step_id} with status: "
                    f"{call.args.get('status') or status}",
        )

    if action == "list":
        return ToolResult(ok=True, summary=plan.to_markdown())

    if action == "export":
        raw = call.args.get("export_path") or "plan.md"
        path = context.inside_run_dir(str(raw))
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(plan.to_markdown(), encoding="utf-8")
        return ToolResult(ok=True, summary=f"Plan exported to: {path.name}",
                          artifact_paths=[path])

    raise ArgValidation(f"todo: unknown action {call.args['action']!r}")
