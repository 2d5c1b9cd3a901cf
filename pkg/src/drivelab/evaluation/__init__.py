"""Closed-loop evaluation: metrics, harness, paired comparison."""

from drivelab.evaluation.compare import ComparisonSummary, compare
from drivelab.evaluation.evaluate import (
    ROW_COLUMNS,
    EvalConfig,
    MetricsReport,
    aggregate_rows,
    deviation_filter,
    evaluate,
    rollout_row,
)
from drivelab.evaluation.metrics import (
    driving_score,
    min_ade,
    sign_test,
    trajectory_deviations,
)

__all__ = [
    "ComparisonSummary",
    "EvalConfig",
    "MetricsReport",
    "ROW_COLUMNS",
    "aggregate_rows",
    "compare",
    "deviation_filter",
    "driving_score",
    "evaluate",
    "min_ade",
    "rollout_row",
    "sign_test",
    "trajectory_deviations",
]
