"""Acceptance gate: one test per published criterion, one line under -v.

Frozen oracles come from the published result tables; everything runs
offline on replay transcripts, fixture search results, and the hashing
stub embedder.
"""

import json
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esgkit.agent import AgentConfig, Orchestrator
from esgkit.bench import load_questions, run_benchmark
from esgkit.bench.cli import main as cli_main
from esgkit.errors import NoCitations
from esgkit.evaluation.citations import CitationJudgment, citation_scores
from esgkit.evaluation.grading import GradedAnswer, accuracy_summary
from esgkit.evaluation.judging import ensemble_mean, overall_average, JudgeScores
from esgkit.evaluation.reportstats import report_statistics
from esgkit.evaluation.rounding import round_half_up
from esgkit.gateway import (
    HashingEmbedder,
    ModelGateway,
    ReplayProvider,
    RoleBinding,
)
from esgkit.retrieval.documents import Document
from esgkit.retrieval.index import KnowledgeIndex
from esgkit.sandbox import SandboxClient
from esgkit.tools import build_default_registry
from esgkit.tools.web import FixtureSearchBackend

DIMS = ("richness", "completeness", "depth", "coherence",
        "professionalism", "expressiveness")

ROLES = ("main", "deep_researcher", "deep_analyzer", "reformulator",
         "memory", "verifier", "judge")


def turn(response, match=None, prompt_tokens=10, completion_tokens=5):
    entry = {"response": response, "prompt_tokens": prompt_tokens,
             "completion_tokens": completion_tokens}
    if match is not None:
        entry["match"] = match
    return entry


def block(tool, **args):
    return f"```{tool}\n{json.dumps(args)}\n```"


def write_jsonl(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


def make_gateway(entries):
    provider = ReplayProvider(entries)
    return ModelGateway(
        {role: RoleBinding(provider, "replay-model") for role in ROLES})


def agent_config(**overrides):
    base = dict(memory_every=0)
    base.update(overrides)
    return AgentConfig(**base)


# --- criterion 1: overall average oracle -----------------------------------

def within(value, target, tolerance):
    """Exact tolerance check; float subtraction would smear a value that
    sits exactly on the boundary (|7.1415 - 7.142| must equal 0.0005)."""
    return abs(Decimal(str(value)) - Decimal(target)) <= Decimal(tolerance)


def test_criterion_01_overall_average_matches_published_rows():
    agent_dims = dict(zip(DIMS, (8.125, 7.958, 7.750, 8.167, 8.292, 7.125)))
    agent = overall_average(agent_dims, correctness=0.930, faithfulness=0.805)
    assert within(agent, "8.096", "0.0005")
    assert round_half_up(agent, 3) == 8.096

    baseline_dims = dict(zip(DIMS, (6.875, 7.042, 6.000, 7.542, 7.250, 5.833)))
    baseline = overall_average(baseline_dims, correctness=0.894,
                               faithfulness=0.765)
    assert within(baseline, "7.142", "0.0005")
    assert round_half_up(baseline, 3) == 7.142


# --- criterion 2: judge ensemble oracle -------------------------------------

def test_criterion_02_ensemble_means_match_per_judge_columns():
    def scores_for(column):
        return [
            JudgeScores(judge=f"judge:{i}",
                        scores={dim: value for dim in DIMS})
            for i, value in enumerate(column)
        ]

    richness = ensemble_mean(scores_for((5.333, 8.667, 6.500, 7.000)))
    assert round_half_up(richness["richness"], 3) == 6.875

    depth = ensemble_mean(scores_for((6.299, 8.667, 7.833, 8.500)))
    # full-precision mean is 7.82475; rounding half-up gives the table value
    assert depth["depth"] == pytest.approx(7.82475)
    assert round_half_up(depth["depth"], 3) == 7.825


# --- criterion 3: accuracy table oracle --------------------------------------

def _graded(level, n, correct):
    return [GradedAnswer(f"L{level}-{i}", level, i < correct)
            for i in range(n)]


def test_criterion_03_accuracy_summary_matches_published_rows():
    agent = accuracy_summary(
        _graded(1, 132, 119) + _graded(2, 114, 88))
    assert agent.levels[1].acc_pct == 90.15
    assert agent.levels[2].acc_pct == 77.19
    assert agent.total.acc_pct == 84.15

    ablated = accuracy_summary(
        _graded(1, 132, 117) + _graded(2, 114, 75))
    assert ablated.levels[1].acc_pct == 88.64
    assert ablated.levels[2].acc_pct == 65.79
    assert ablated.total.acc_pct == 78.05


# --- criterion 4: citation metric properties ---------------------------------

judgments_strategy = st.lists(
    st.builds(
        lambda existence, support, causality, i: CitationJudgment(
            index=i,
            uri="doc://x#0000" if existence else None,
            existence=existence,
            support=support,
            causality=existence and causality,
            approximate=existence,
        ),
        st.booleans(), st.booleans(), st.booleans(),
        st.integers(min_value=1, max_value=30),
    ),
    max_size=12,
)


@settings(max_examples=1000, deadline=None)
@given(judgments_strategy)
def test_criterion_04_faithfulness_never_exceeds_correctness(judgments):
    if not judgments:
        with pytest.raises(NoCitations):
            citation_scores(judgments)
        return
    for j in judgments:
        if not j.correct:
            assert not j.faithful
    scores = citation_scores(judgments)
    assert scores.faithfulness <= scores.correctness
    assert 0.0 <= scores.faithfulness <= 1.0
    assert 0.0 <= scores.correctness <= 1.0


# --- criterion 5: end-to-end replay runs -------------------------------------

WACI_QUESTION = (
    "An asset manager wants to calculate the Weighted Average Carbon "
    "Intensity (WACI) of a portfolio. Company A: investment value 40 $m, "
    "revenue 200 $m, scope 1 and 2 emissions 50,000 tCO2e. Calculate the "
    "carbon intensity of company A (Emissions / Revenue) in tCO2e / $m, "
    "rounded to the nearest integer."
)

GRI_QUESTION = (
    "According to the GRI 101 Biodiversity 2024 standard, which "
    "international framework's 2050 vision and 2030 targets are "
    "organizations required to reference in their policies or commitments "
    "under Disclosure 101-1?"
)

GBF_ANSWER = "Kunming-Montreal Global Biodiversity Framework"


def waci_transcript():
    return [
        turn("Compute emissions over revenue.\n"
             + block("code_interpreter", code="print(50000/200)"),
             match="Weighted Average Carbon Intensity"),
        # no sandbox in this run; fall back to working it out from the data
        turn(block("reformulator",
                   task="State company A's carbon intensity as an integer",
                   data=["Emissions 50,000 tCO2e over revenue 200 $m"]),
             match="ERROR SandboxUnavailable"),
        turn("250", match="Task:"),
        turn(block("done", result="250",
                   reasoning="50000 / 200 = 250 tCO2e per $m"),
             match="250"),
    ]


def gri_transcript():
    findings = ("Answer Found: Yes. Disclosure 101-1 of GRI 101: "
                "Biodiversity 2024 requires organizations to reference the "
                "Kunming-Montreal Global Biodiversity Framework, including "
                "its 2050 vision and 2030 targets.")
    return [
        turn(block("todo", action="add", step_id="s1",
                   task="identify the referenced framework"),
             match="GRI 101"),
        turn(block("retriever", query="GRI 101 biodiversity disclosure"),
             match="Added step s1"),
        turn(block("deep_researcher",
                   task="Which framework does GRI 101 Disclosure 101-1 "
                        "reference?"),
             match="Retrieved"),
        turn(block("web_search", query="GRI 101 biodiversity 2024 framework"),
             match="Research task"),
        turn(findings, match="globalreporting"),
        turn(block("reformulator", task="Name the framework",
                   data=[findings]),
             match="Deep research summary"),
        turn(GBF_ANSWER, match="Task:"),
        turn(block("done", result=GBF_ANSWER), match="Kunming-Montreal"),
    ]


def gri_corpus_index():
    index = KnowledgeIndex(HashingEmbedder(), chunk_size=400, chunk_overlap=0)
    index.add_document(Document(
        doc_id="gri101", source_path="corpus/gri101.md",
        title="GRI 101 Biodiversity 2024",
        body=("GRI 101: Biodiversity 2024 sets disclosure requirements for "
              "biodiversity. Disclosure 101-1 covers policies and "
              "commitments aligned with the Kunming-Montreal Global "
              "Biodiversity Framework, its 2050 vision and 2030 targets."),
    ))
    index.add_document(Document(
        doc_id="tcfd", source_path="corpus/tcfd.md", title="TCFD metrics",
        body=("The TCFD recommends the weighted average carbon intensity "
              "metric for portfolios, aggregating emissions per revenue."),
    ))
    return index.build()


def gri_fixtures(tmp_path):
    return write_jsonl(tmp_path / "fixtures.jsonl", [{
        "key": "gri 101",
        "results": [
            {"title": "GRI 101 Biodiversity 2024",
             "url": "https://www.globalreporting.org/gri-101",
             "snippet": "Disclosure 101-1 references the Kunming-Montreal "
                        "Global Biodiversity Framework."},
            {"title": "Kunming-Montreal Global Biodiversity Framework",
             "url": "https://www.cbd.int/gbf",
             "snippet": "2050 vision and 2030 targets."},
        ],
    }])


def replay_benchmark_inputs(tmp_path, include_never_done=False):
    questions = [
        {"question_id": "q-waci", "level": 2, "type": "fib",
         "question": WACI_QUESTION, "answer": "250"},
        {"question_id": "q-gri", "level": 2, "type": "fib",
         "question": GRI_QUESTION, "answer": GBF_ANSWER},
    ]
    replay_dir = tmp_path / "transcripts"
    write_jsonl(replay_dir / "q-waci.jsonl", waci_transcript())
    write_jsonl(replay_dir / "q-gri.jsonl", gri_transcript())
    if include_never_done:
        questions.append({"question_id": "q-never", "level": 1,
                          "type": "tf", "question": "Will it finish?",
                          "answer": "true"})
        write_jsonl(replay_dir / "q-never.jsonl",
                    [turn("Still deliberating, taking no action.")] * 50)
    questions_path = write_jsonl(tmp_path / "questions.jsonl", questions)
    return questions_path, replay_dir


def test_criterion_05_replay_runs_terminate_and_grade_correct(tmp_path):
    questions_path, replay_dir = replay_benchmark_inputs(
        tmp_path, include_never_done=True)
    run = run_benchmark(
        load_questions(questions_path), agent_config(),
        tmp_path / "runs", run_id="acceptance",
        replay=replay_dir,
        index=gri_corpus_index(),
        search=FixtureSearchBackend.from_path(gri_fixtures(tmp_path)),
    )
    by_id = {r.question.question_id: r for r in run.results}

    waci = by_id["q-waci"]
    assert waci.outcome.status == "done"
    assert waci.outcome.final_answer == "250"
    assert waci.correct is True
    assert waci.outcome.n_steps <= 50

    gri = by_id["q-gri"]
    assert gri.outcome.status == "done"
    assert gri.outcome.final_answer == GBF_ANSWER
    assert gri.correct is True
    assert gri.outcome.n_steps <= 50

    never = by_id["q-never"]
    assert never.outcome.status == "budget_exhausted"
    assert never.outcome.n_steps == 50
    assert never.correct is False


# --- criterion 6: budget invariants ------------------------------------------

def test_criterion_06_sub_agent_and_main_budgets_hold(tmp_path):
    # deep_researcher exhausts its three calls without findings
    gateway = make_gateway([
        turn(block("deep_researcher", task="unanswerable")),
        turn(block("web_search", query="a"), match="Research task"),
        turn(block("web_search", query="b")),
        turn(block("web_search", query="c")),
        turn(block("done", result="gave up"),
             match="ERROR BudgetExhausted"),
    ])
    orch = Orchestrator(gateway, build_default_registry(), agent_config())
    outcome = orch.run("q", run_dir=tmp_path / "r1")
    assert outcome.status == "done"
    assert gateway.call_total("deep_researcher") == 3

    # deep_analyzer pages through a file within its three calls
    notes = tmp_path / "notes.txt"
    notes.write_text("line one of the evidence\n" * 200)
    gateway = make_gateway([
        turn(block("deep_analyzer", task="summarize",
                   file_paths=["attachments/notes.txt"])),
        turn("```continue\n{}\n```", match="summarize"),
        turn("The file repeats one line of evidence."),
        turn(block("done", result="ok"), match="repeats one line"),
    ])
    orch = Orchestrator(gateway, build_default_registry(), agent_config())
    outcome = orch.run("q", run_dir=tmp_path / "r2", attachments=[notes])
    assert outcome.status == "done"
    assert gateway.call_total("deep_analyzer") == 2
    assert gateway.call_total("deep_analyzer") <= 3

    # the main loop never calls the model more than m times
    m = 5
    gateway = make_gateway([turn("pondering without acting")] * m)
    config = agent_config(step_budgets={
        "main": m, "deep_researcher": 3, "deep_analyzer": 3})
    orch = Orchestrator(gateway, build_default_registry(), config)
    outcome = orch.run("q", run_dir=tmp_path / "r3")
    assert outcome.status == "budget_exhausted"
    assert outcome.n_steps == m
    assert gateway.call_total("main") == m


# --- criterion 7: retrieval ranking oracle -----------------------------------

def test_criterion_07_marker_ranks_first_and_ordering_is_cosine():
    embedder = HashingEmbedder()
    index = KnowledgeIndex(embedder, chunk_size=300, chunk_overlap=0)
    bodies = {
        "alpha": "Solar generation rose steadily through 2024 while grid "
                 "storage capacity lagged behind demand in every quarter.",
        "bravo": "The incident report referenced code ZXQ-77 when the "
                 "turbine control system failed during the spring audit.",
        "charlie": "Water usage disclosures improved after the new policy, "
                   "with withdrawal intensity falling across all sites.",
    }
    for doc_id, body in bodies.items():
        index.add_document(Document(doc_id=doc_id, source_path=f"{doc_id}.md",
                                    title=doc_id, body=body))
    index.build()

    query = "what happened in incident ZXQ-77"
    hits = index.retrieve(query, top_k=len(index.chunks), mode="vector")
    assert "ZXQ-77" in hits[0].text

    qvec = embedder.embed([query])[0]
    chunk_vecs = np.stack([c.embedding for c in index.chunks])
    scores = chunk_vecs @ qvec
    order = np.argsort(-scores, kind="stable")
    expected = [index.chunks[i].chunk_id for i in order]
    assert [h.chunk_id for h in hits] == expected
    for hit, i in zip(hits, order):
        assert hit.score == pytest.approx(float(scores[i]))

    hybrid = index.retrieve(query, top_k=len(index.chunks), mode="hybrid")
    assert hybrid[0].chunk_id == expected[0]


# --- criterion 8: report statistics ------------------------------------------

REPORT_WITH_CHARTS = """# Energy transition review

## Generation mix

Solar output rose sharply [1](doc://a#0000) while wind stalled
[2](doc://b#0000), as the charts show.

![generation mix](figures/mix.png)

![yearly trend](figures/trend.png)

Capacity additions accelerated [3](doc://c#0000). Storage lagged
[1](doc://a#0000) even as grid investment held steady [2](doc://b#0000).

## References

[1](doc://a#0000) Solar annual report
[2](doc://b#0000) Wind sector review
[3](doc://c#0000) Capacity statistics
"""

REPORT_SINGLE_SOURCE = """# Single source note

One source carries the argument [1](doc://a#0000): it sets the baseline
[1](doc://a#0000), the method [1](doc://a#0000), the finding
[1](doc://a#0000), and the caveat [1](doc://a#0000).

## References

[1](doc://a#0000) The one report
"""


def test_criterion_08_report_statistics_count_charts_refs_citations():
    stats = report_statistics(REPORT_WITH_CHARTS)
    assert stats.chart_count == 2
    assert stats.reference_count == 3
    assert stats.citation_count == 5

    reuse = report_statistics(REPORT_SINGLE_SOURCE)
    assert reuse.reference_count == 1
    assert reuse.citation_count == 5


# --- criterion 9: ablation soundness -----------------------------------------

def test_criterion_09_ablation_disables_researcher_without_side_effects(
        tmp_path, capsys):
    questions_path = write_jsonl(tmp_path / "questions.jsonl", [
        {"question_id": "q-clean", "level": 1, "type": "tf",
         "question": "Is the framework referenced?", "answer": "true"},
        {"question_id": "q-tries", "level": 1, "type": "tf",
         "question": "Does the sector report?", "answer": "true"},
    ])
    replay_dir = tmp_path / "transcripts"
    write_jsonl(replay_dir / "q-clean.jsonl", [
        turn(block("done", result="true"), match="framework"),
    ])
    write_jsonl(replay_dir / "q-tries.jsonl", [
        turn(block("deep_researcher", task="sector reporting")),
        turn(block("done", result="true"), match="ERROR ToolDisabled"),
    ])

    code = cli_main([
        "run-bench", "--questions", str(questions_path),
        "--run-root", str(tmp_path / "runs"), "--run-id", "ablated",
        "--replay", str(replay_dir), "--ablate", "deep_researcher",
    ])
    assert code == 0
    run_dir = tmp_path / "runs" / "ablated"

    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["ablated_tools"] == ["deep_researcher"]

    clean_trace = [json.loads(line) for line in
                   (run_dir / "work" / "q-clean" / "trace.jsonl")
                   .read_text().splitlines()]
    assert all((s["tool_call"] or {}).get("tool") != "deep_researcher"
               for s in clean_trace)

    tries_trace = [json.loads(line) for line in
                   (run_dir / "work" / "q-tries" / "trace.jsonl")
                   .read_text().splitlines()]
    attempt = tries_trace[0]
    assert attempt["tool_call"]["tool"] == "deep_researcher"
    assert attempt["ok"] is False
    assert attempt["error"]["kind"] == "ToolDisabled"
    # no research artifact, no sub-agent model usage
    assert not list((run_dir / "work" / "q-tries").glob("research_*.md"))
    assert attempt["completion_tokens"] == 5  # the main turn only


# --- criterion 10: determinism -----------------------------------------------

def test_criterion_10_identical_replay_runs_produce_identical_outputs(
        tmp_path):
    questions_path, replay_dir = replay_benchmark_inputs(tmp_path)
    questions = load_questions(questions_path)
    index = gri_corpus_index()
    search = FixtureSearchBackend.from_path(gri_fixtures(tmp_path))

    runs = [
        run_benchmark(questions, agent_config(), tmp_path / "runs",
                      run_id=f"d{i}", replay=replay_dir,
                      index=index, search=search)
        for i in (1, 2)
    ]

    def answers_without_timing(run):
        rows = []
        for line in (run.run_dir / "answers.jsonl").read_text().splitlines():
            row = json.loads(line)
            row.pop("duration_ms")
            rows.append(row)
        return rows

    assert answers_without_timing(runs[0]) == answers_without_timing(runs[1])
    assert (runs[0].run_dir / "eval" / "summary.csv").read_text() == \
           (runs[1].run_dir / "eval" / "summary.csv").read_text()


# --- criterion 11: sandbox execution (needs the runner package) ---------------

sandbox_missing = not SandboxClient().is_available()


@pytest.mark.skipif(sandbox_missing,
                    reason="sandbox runner package is not installed")
def test_criterion_11_sandbox_executes_times_out_and_captures_artifacts(
        tmp_path):
    tripwire = tmp_path / "outside.txt"
    tripwire.write_text("untouched")
    workdir = tmp_path / "work"

    with SandboxClient() as client:
        result = client.execute("print(50000/200)", workdir)
        assert result.exit_code == 0
        assert result.stdout == "250.0\n"
        assert result.timed_out is False

        looped = client.execute("while True:\n    pass", workdir,
                                timeout_s=1)
        assert looped.timed_out is True
        assert looped.exit_code != 0

    with SandboxClient() as client:
        charted = client.execute(
            "with open('chart.png', 'wb') as fh:\n"
            "    fh.write(b'\\x89PNG fake chart bytes')\n"
            "print('drawn')",
            workdir,
        )
        assert charted.exit_code == 0
        assert "chart.png" in charted.artifacts

    assert tripwire.read_text() == "untouched"
