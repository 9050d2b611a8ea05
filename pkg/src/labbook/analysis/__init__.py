"""Usage metrics, questionnaire scoring and group statistics."""

from .compare import GroupComparison, compare_groups, format_comparison
from .metrics import MetricsRow, UsageMetrics, read_metrics_csv, repo_metrics
from .stats import (
    MwuResult,
    TTestResult,
    betai,
    mann_whitney_u,
    normal_cdf,
    t_test_ind,
    t_two_sided_p,
)
from .tam import TamRow, TamScores, read_tam_csv, score_tam

__all__ = [
    "GroupComparison",
    "MetricsRow",
    "MwuResult",
    "TTestResult",
    "TamRow",
    "TamScores",
    "UsageMetrics",
    "betai",
    "compare_groups",
    "format_comparison",
    "mann_whitney_u",
    "normal_cdf",
    "read_metrics_csv",
    "read_tam_csv",
    "repo_metrics",
    "score_tam",
    "t_test_ind",
    "t_two_sided_p",
]
