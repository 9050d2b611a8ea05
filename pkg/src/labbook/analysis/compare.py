"""Group comparison: both tests plus medians for one variable."""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from ..errors import InvalidInput
from .stats import MwuResult, TTestResult, mann_whitney_u, t_test_ind


@dataclass(frozen=True)
class GroupComparison:
    n_a: int
    n_b: int
    median_a: float
    median_b: float
    u_statistic: float
    p_mwu: float
    mwu_method: str
    t_statistic: float | None
    p_t: float | None
    t_df: float | None
    t_variance: str

    def as_dict(self) -> dict:
        return {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "median_a": self.median_a,
            "median_b": self.median_b,
            "u_statistic": self.u_statistic,
            "p_mwu": self.p_mwu,
            "mwu_method": self.mwu_method,
            "t_statistic": self.t_statistic,
            "p_t": self.p_t,
            "t_df": self.t_df,
            "t_variance": self.t_variance,
        }


def compare_groups(
    a,
    b,
    mwu_method: str = "asymptotic_cc",
    t_variance: str = "pooled",
) -> GroupComparison:
    """Run both two-sample tests on one variable.

    The t-test needs two values per group; with fewer it is skipped
    (None fields) while the rank test still runs.
    """
    if not a or not b:
        raise InvalidInput("both groups need at least one value")
    mwu: MwuResult = mann_whitney_u(list(a), list(b), method=mwu_method)
    t_result: TTestResult | None = None
    if len(a) >= 2 and len(b) >= 2:
        t_result = t_test_ind(list(a), list(b), variance=t_variance)
    return GroupComparison(
        n_a=len(a),
        n_b=len(b),
        median_a=statistics.median(a),
        median_b=statistics.median(b),
        u_statistic=mwu.u,
        p_mwu=mwu.p,
        mwu_method=mwu.method,
        t_statistic=None if t_result is None else t_result.t,
        p_t=None if t_result is None else t_result.p,
        t_df=None if t_result is None else t_result.df,
        t_variance=t_variance,
    )


def format_comparison(label: str, comparison: GroupComparison) -> str:
    """Aligned-text table for terminal output."""
    rows = [
        ("variable", label),
        ("n (a / b)", f"{comparison.n_a} / {comparison.n_b}"),
        ("median a", f"{comparison.median_a:.2f}"),
        ("median b", f"{comparison.median_b:.2f}"),
        ("U", f"{comparison.u_statistic:.1f}"),
        ("p (rank test)", f"{comparison.p_mwu:.3f} [{comparison.mwu_method}]"),
    ]
    if comparison.t_statistic is None:
        rows.append(("t-test", "skipped (needs 2+ per group)"))
    else:
        rows.append(("t", f"{comparison.t_statistic:.2f}"))
        rows.append(
            ("p (t-test)", f"{comparison.p_t:.3f} [df={comparison.t_df:.1f}, {comparison.t_variance}]")
        )
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)
