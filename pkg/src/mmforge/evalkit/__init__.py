"""Answer grading and benchmark analytics."""

from .matching import Verdict, fuzzy_match
from .grader import GradingError, build_grader_prompt, grade_llm, grader_template
from .tables import BENCHMARK_CATEGORIES, BenchmarkMeta, ScoreTable
from .analytics import (
    GapRow,
    PcaClusters,
    category_scores,
    correlation_matrix,
    pca_cluster,
    random_baseline,
    vision_gap_report,
)

__all__ = [
    "Verdict",
    "fuzzy_match",
    "grade_llm",
    "build_grader_prompt",
    "grader_template",
    "GradingError",
    "ScoreTable",
    "BenchmarkMeta",
    "BENCHMARK_CATEGORIES",
    "category_scores",
    "random_baseline",
    "vision_gap_report",
    "GapRow",
    "correlation_matrix",
    "pca_cluster",
    "PcaClusters",
]
