"""Agent loop tests, driven end to end by scripted replay transcripts."""

import json

import pytest

from esgkit.agent import (
    AgentConfig,
    Orchestrator,
    load_config,
    plan,
    read_trace,
    synthesize_memory,
    verify_step,
)
from esgkit.errors import EmptyInput, TranscriptExhausted
from esgkit.gateway import ModelGateway, ReplayProvider, RoleBinding
from esgkit.tools import build_default_registry
from esgkit.tools.web import FixtureSearchBackend

ROLES = ("main", "deep_researcher", "deep_analyzer", "reformulator",
         "memory", "verifier", "plotter", "judge")


def make_gateway(entries):
    provider = ReplayProvider(entries)
    bindings = {role: RoleBinding(provider, "replay-model") for role in ROLES}
    return ModelGateway(bindings), provider


def turn(response, match=None, prompt_tokens=10, completion_tokens=5):
    entry = {"response": response, "prompt_tokens": prompt_tokens,
             "completion_tokens": completion_tokens}
    if match is not None:
        entry["match"] = match
    return entry


def block(tool, **args):
    return f"```{tool}\n{json.dumps(args)}\n```"


def small_config(**overrides):
    base = dict(
        step_budgets={"main": 50, "deep_researcher": 3, "deep_analyzer": 3},
        memory_every=0,
    )
    base.update(overrides)
    return AgentConfig(**base)


def run_agent(entries, tmp_path, config=None, **kwargs):
    gateway, provider = make_gateway(entries)
    registry = build_default_registry()
    orch = Orchestrator(gateway, registry, config or small_config(), **kwargs)
    outcome = orch.run("What is the carbon intensity?",
                       run_dir=tmp_path / "run")
    return outcome, gateway, provider


class TestPlanning:
    def test_plan_block_becomes_ledger(self):
        script = [turn(
            "Sketching a plan.\n```plan\n" + json.dumps([
                {"step_id": "s1", "description": "collect emissions data"},
                {"step_id": "s2", "description": "compute intensity",
                 "priority": "high"},
            ]) + "\n```"
        )]
        gateway, _ = make_gateway(script)
        ledger = plan("carbon intensity for ACME", gateway)
        assert [s.step_id for s in ledger.steps] == ["s1", "s2"]
        assert ledger.steps[1].priority == "high"

    def test_malformed_plan_falls_back_to_single_step(self):
        gateway, _ = make_gateway([turn("no fenced plan here")])
        ledger = plan("q", gateway)
        assert len(ledger.steps) == 1
        assert ledger.steps[0].priority == "high"

    def test_empty_query_rejected(self):
        gateway, _ = make_gateway([])
        with pytest.raises(EmptyInput):
            plan("   ", gateway)


class TestMemorySynthesis:
    def test_entries_parsed_and_capped(self):
        payload = [
            {"kind": "insight", "text": f"finding {i}", "entities": ["ACME Inc"]}
            for i in range(8)
        ]
        gateway, _ = make_gateway([
            turn("```memory\n" + json.dumps(payload) + "\n```",
                 match="Recent steps"),
        ])
        entries = synthesize_memory(["step 0: retriever ok"], gateway,
                                    max_insights=5)
        assert len(entries) == 5
        # entity names come back canonicalized, suffix stripped
        assert entries[0].entities == ["ACME Inc"]

    def test_malformed_memory_yields_nothing(self):
        gateway, _ = make_gateway([turn("```memory\nnot json\n```")])
        assert synthesize_memory(["step 0"], gateway) == []


class TestVerify:
    def test_unsatisfied_detected(self):
        gateway, _ = make_gateway([turn("Unsatisfied: the year is missing")])
        verdict = verify_step("find the 2030 target", "some findings", gateway)
        assert not verdict.satisfied

    def test_satisfied_detected(self):
        gateway, _ = make_gateway([turn("satisfied - covers the task")])
        assert verify_step("t", "r", gateway).satisfied


class TestRunLoop:
    def test_done_terminates_run(self, tmp_path):
        outcome, gateway, provider = run_agent([
            turn("The answer is direct.\n"
                 + block("done", result="42 tCO2e", reasoning="known figure"),
                 match="carbon intensity"),
        ], tmp_path)
        assert outcome.status == "done"
        assert outcome.final_answer == "42 tCO2e"
        assert outcome.final_reasoning == "known figure"
        assert outcome.n_steps == 1
        assert outcome.steps[0].tool_call["tool"] == "done"
        assert outcome.steps[0].ok is True
        assert provider.remaining == 0

    def test_budget_exhaustion_consumes_exactly_m_steps(self, tmp_path):
        config = small_config(step_budgets={
            "main": 3, "deep_researcher": 3, "deep_analyzer": 3})
        outcome, gateway, provider = run_agent(
            [turn("Still thinking, no action yet.")] * 3,
            tmp_path, config=config)
        assert outcome.status == "budget_exhausted"
        assert outcome.final_answer is None
        assert outcome.n_steps == 3
        assert [s.index for s in outcome.steps] == [0, 1, 2]
        assert all(s.tool_call is None for s in outcome.steps)
        # the model was consulted exactly once per step, never more
        assert provider.served == 3

    def test_malformed_turn_gets_corrective_feedback(self, tmp_path):
        outcome, _, _ = run_agent([
            turn("I will use the retriever soon."),
            # the guard proves the corrective system message arrived
            turn(block("done", result="ok"), match="not a valid action"),
        ], tmp_path)
        assert outcome.status == "done"
        assert outcome.steps[0].ok is None
        assert "malformed turn" in outcome.steps[0].note

    def test_bad_json_arguments_reported(self, tmp_path):
        outcome, _, _ = run_agent([
            turn("```done\nnot json at all\n```"),
            turn(block("done", result="ok"), match="not valid JSON"),
        ], tmp_path)
        assert outcome.status == "done"
        assert outcome.n_steps == 2

    def test_tool_error_relayed_to_model(self, tmp_path):
        outcome, _, _ = run_agent([
            # no index attached, so the retriever fails
            turn(block("retriever", query="emissions")),
            turn(block("done", result="gave up"), match="ERROR EmptyIndex"),
        ], tmp_path)
        assert outcome.status == "done"
        assert outcome.steps[0].ok is False
        assert outcome.steps[0].error["kind"] == "EmptyIndex"

    def test_run_survives_tool_validation_error(self, tmp_path):
        outcome, _, _ = run_agent([
            turn(block("retriever", top_k=3)),  # missing required query
            turn(block("done", result="ok"), match="ERROR ArgValidation"),
        ], tmp_path)
        assert outcome.status == "done"
        assert outcome.steps[0].error["kind"] == "ArgValidation"

    def test_transcript_exhaustion_is_an_error_outcome(self, tmp_path):
        outcome, _, _ = run_agent([turn("no action")], tmp_path)
        assert outcome.status == "error"
        assert "TranscriptExhausted" in outcome.error
        assert outcome.n_steps == 1  # the malformed step was still recorded

    def test_trace_roundtrip(self, tmp_path):
        outcome, _, _ = run_agent([
            turn(block("todo", action="add", step_id="s1", task="gather")),
            turn(block("done", result="done now"), match="Added step s1"),
        ], tmp_path)
        loaded = read_trace(tmp_path / "run" / "trace.jsonl")
        assert [s.to_dict() for s in loaded] == \
               [s.to_dict() for s in outcome.steps]

    def test_attachments_are_copied_and_announced(self, tmp_path):
        data = tmp_path / "q1_data.txt"
        data.write_text("intensity: 3.1 tCO2e per million EUR\n")
        gateway, _ = make_gateway([
            turn(block("converter", path="attachments/q1_data.txt"),
                 match="attachments/q1_data.txt"),
            turn(block("done", result="3.1"), match="intensity: 3.1"),
        ])
        orch = Orchestrator(gateway, build_default_registry(), small_config())
        outcome = orch.run("What is the intensity?",
                           run_dir=tmp_path / "run", attachments=[data])
        assert outcome.status == "done"
        assert (tmp_path / "run" / "attachments" / "q1_data.txt").exists()

    def test_memory_cadence_every_n_steps(self, tmp_path):
        config = small_config(memory_every=2)
        insight = [{"kind": "insight", "text": "ACME reports yearly"}]
        outcome, gateway, provider = run_agent([
            turn(block("todo", action="add", step_id="s1", task="a")),
            turn(block("todo", action="add", step_id="s2", task="b")),
            # checkpoint after step 2, and the distilled note must reach
            # the next main turn (the guard proves it did)
            turn("```memory\n" + json.dumps(insight) + "\n```",
                 match="Recent steps"),
            turn(block("done", result="fin"),
                 match="ACME reports yearly"),
        ], tmp_path, config=config)
        assert outcome.status == "done"
        assert gateway.call_total("memory") == 1
        assert provider.remaining == 0

    def test_malformed_memory_is_ignored(self, tmp_path):
        config = small_config(memory_every=1)
        outcome, gateway, _ = run_agent([
            turn(block("todo", action="add", step_id="s1", task="a")),
            turn("no fenced memory block here", match="Recent steps"),
            turn(block("done", result="fin")),
        ], tmp_path, config=config)
        assert outcome.status == "done"
        assert gateway.call_total("memory") == 1

    def test_sub_agent_usage_folds_into_owning_step(self, tmp_path):
        fixtures = tmp_path / "fixtures.jsonl"
        fixtures.write_text(json.dumps({
            "key": "waci",
            "results": [{"title": "WACI methodology", "url": "https://x/waci",
                         "snippet": "weighted average carbon intensity"}],
        }) + "\n")
        search = FixtureSearchBackend.from_path(fixtures)
        gateway, _ = make_gateway([
            turn("Research first.\n" + block("deep_researcher",
                                             task="WACI definition"),
                 prompt_tokens=100, completion_tokens=20),
            # nested researcher turns, counted against the same step
            turn(block("web_search", query="waci"),
                 match="Research task", prompt_tokens=30, completion_tokens=7),
            turn("Answer Found: Yes. WACI weights by portfolio share.",
                 match="WACI methodology", prompt_tokens=40, completion_tokens=9),
            turn(block("done", result="weighted average carbon intensity"),
                 match="Deep research summary"),
        ])
        orch = Orchestrator(gateway, build_default_registry(), small_config(),
                            search=search)
        outcome = orch.run("define WACI", run_dir=tmp_path / "run")
        assert outcome.status == "done"
        research_step = outcome.steps[0]
        assert research_step.tool_call["tool"] == "deep_researcher"
        # 100+30+40 prompt, 20+7+9 completion for the whole step
        assert research_step.prompt_tokens == 170
        assert research_step.completion_tokens == 36
        assert gateway.call_total("deep_researcher") == 2
        assert any(p.endswith(".md") for p in outcome.artifacts)

    def test_outcome_usage_covers_all_roles(self, tmp_path):
        outcome, _, _ = run_agent([
            turn(block("done", result="x"), prompt_tokens=11,
                 completion_tokens=3),
        ], tmp_path)
        assert outcome.usage.prompt_tokens == 11
        assert outcome.usage.completion_tokens == 3


class TestVerificationRetries:
    def script(self):
        return [
            turn(block("deep_researcher", task="find the 2030 target")),
            turn("Answer Found: No. Could not locate it.",
                 match="Research task"),
            turn("unsatisfied: findings lack the target year",
                 match="Task: find the 2030 target"),
            turn("Answer Found: Yes. The 2030 target is a 45% cut.",
                 match="Research task"),
            turn("satisfied", match="Task: find the 2030 target"),
            turn(block("done", result="45% cut"),
                 match="Deep research summary"),
        ]

    def test_unsatisfied_result_retries_as_new_step(self, tmp_path):
        config = small_config(verify_subagents=True)
        outcome, gateway, _ = run_agent(self.script(), tmp_path, config=config)
        assert outcome.status == "done"
        assert outcome.n_steps == 3
        assert outcome.steps[1].note.startswith("refinement retry")
        assert outcome.steps[1].note.endswith("verified")
        assert gateway.call_total("verifier") == 2
        assert gateway.call_total("deep_researcher") == 2

    def test_retries_capped_then_accepted(self, tmp_path):
        config = small_config(verify_subagents=True, refine_retries=1)
        script = [
            turn(block("deep_researcher", task="find the 2030 target")),
            turn("Answer Found: No.", match="Research task"),
            turn("unsatisfied: missing", match="Task:"),
            turn("Answer Found: No. Still nothing.", match="Research task"),
            turn("unsatisfied: still missing", match="Task:"),
            turn(block("done", result="unknown"),
                 match="Deep research summary"),
        ]
        outcome, gateway, _ = run_agent(script, tmp_path, config=config)
        assert outcome.status == "done"
        assert outcome.steps[1].note.startswith("verification failed, accepted")
        assert outcome.steps[1].ok is True  # the tool itself succeeded
        assert gateway.call_total("verifier") == 2

    def test_verification_off_by_default(self, tmp_path):
        script = [
            turn(block("deep_researcher", task="t")),
            turn("Answer Found: Yes. Fine.", match="Research task"),
            turn(block("done", result="ok"), match="Deep research summary"),
        ]
        outcome, gateway, _ = run_agent(script, tmp_path)
        assert outcome.status == "done"
        assert gateway.call_total("verifier") == 0


class TestConfig:
    def test_defaults(self):
        config = AgentConfig()
        assert config.main_budget == 50
        assert config.step_budgets["deep_researcher"] == 3
        assert config.step_budgets["deep_analyzer"] == 3
        assert config.retrieval_mode == "hybrid"
        assert config.effective_citation_judge() == "judge"

    def test_yaml_roundtrip(self, tmp_path):
        cfg = tmp_path / "agent.yaml"
        cfg.write_text(
            "roles:\n  main: other-model\n"
            "budgets:\n  main: 12\n"
            "tools:\n  disabled: [web_search]\n"
            "retrieval:\n  top_k: 7\n  mode: vector\n"
            "memory:\n  every: 4\n"
            "verification:\n  enabled: true\n  retries: 1\n"
            "limits:\n  question_timeout_s: 30\n"
            "judges:\n  roles: [judge:a, judge:b]\n"
        )
        config = load_config(cfg)
        assert config.role_models["main"] == "other-model"
        assert config.main_budget == 12
        assert config.disabled_tools == {"web_search"}
        assert config.retrieval_top_k == 7
        assert config.retrieval_mode == "vector"
        assert config.memory_every == 4
        assert config.verify_subagents is True
        assert config.refine_retries == 1
        assert config.question_timeout_s == 30.0
        assert config.judge_roles == ["judge:a", "judge:b"]
        assert config.effective_citation_judge() == "judge:a"

    def test_invalid_budget_rejected(self):
        with pytest.raises(ValueError):
            AgentConfig(step_budgets={"main": 0})

    def test_unknown_retrieval_mode_rejected(self):
        with pytest.raises(ValueError):
            AgentConfig(retrieval_mode="graph_only")


class TestReplayStrictness:
    def test_out_of_order_script_raises(self, tmp_path):
        gateway, _ = make_gateway([
            turn(block("done", result="x"), match="text that never appears"),
        ])
        orch = Orchestrator(gateway, build_default_registry(), small_config())
        outcome = orch.run("q", run_dir=tmp_path / "run")
        assert outcome.status == "error"
        assert "TranscriptExhausted" in outcome.error

    def test_direct_exhaustion(self):
        provider = ReplayProvider([])
        gateway = ModelGateway({"main": RoleBinding(provider, "m")})
        from esgkit.gateway import ChatMessage, ChatRequest
        with pytest.raises(TranscriptExhausted):
            gateway.complete(ChatRequest(
                model_role="main",
                messages=[ChatMessage("user", "hi")],
            ))
