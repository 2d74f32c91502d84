from .evaluate import (
    Level3Result,
    collect_run_evidence,
    evaluate_level3,
    evaluate_report,
    write_level3_csv,
)
from .questions import CLOSED_TYPES, QUESTION_TYPES, Question, load_questions
from .runner import (
    BenchmarkRun,
    QuestionResult,
    build_gateway,
    build_provider,
    run_benchmark,
    run_one,
)
from .tables import (
    accuracy_markdown,
    accuracy_table,
    check_against_csv,
    read_answers,
    summary_from_answers,
)

__all__ = [
    "BenchmarkRun",
    "CLOSED_TYPES",
    "Level3Result",
    "QUESTION_TYPES",
    "Question",
    "QuestionResult",
    "accuracy_markdown",
    "accuracy_table",
    "build_gateway",
    "build_provider",
    "check_against_csv",
    "collect_run_evidence",
    "evaluate_level3",
    "evaluate_report",
    "load_questions",
    "read_answers",
    "run_benchmark",
    "run_one",
    "summary_from_answers",
    "write_level3_csv",
]
