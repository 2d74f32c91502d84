from .capabilities import CapabilityDistribution, capability_distribution
from .citations import (
    CitationInstance,
    CitationJudgment,
    CitationScores,
    citation_scores,
    extract_citations,
    judge_citation,
    parse_references,
    split_report,
)
from .grading import (
    AccuracySummary,
    GradedAnswer,
    LevelAccuracy,
    accuracy_summary,
    grade_closed,
    normalize_answer,
)
from .judging import (
    DIMENSIONS,
    JudgeScores,
    ensemble_mean,
    judge_dimensions,
    overall_average,
)
from .reportstats import ReportStats, report_statistics
from .rounding import pct, round_half_up

__all__ = [
    "AccuracySummary",
    "CapabilityDistribution",
    "CitationInstance",
    "CitationJudgment",
    "CitationScores",
    "DIMENSIONS",
    "GradedAnswer",
    "JudgeScores",
    "LevelAccuracy",
    "ReportStats",
    "accuracy_summary",
    "capability_distribution",
    "citation_scores",
    "ensemble_mean",
    "extract_citations",
    "grade_closed",
    "judge_citation",
    "judge_dimensions",
    "normalize_answer",
    "overall_average",
    "parse_references",
    "pct",
    "report_statistics",
    "round_half_up",
    "split_report",
]
