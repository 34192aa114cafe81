"""Adaptive tree approximation and the near-best oracle."""

from gradfit.tree.algorithm import (
    VARIANT_BUDGET,
    VARIANT_THRESHOLD,
    ApproxTree,
    StepRecord,
    TreeNode,
    harmonic_indicator,
    tree_budget,
    tree_budget_schedule,
    tree_threshold,
)
from gradfit.tree.oracle import (
    STRATEGIES,
    NearBestReport,
    NearBestRow,
    SigmaPrimeResult,
    near_best_report,
    sigma_prime,
)
from gradfit.tree.report import (
    CompletionRecord,
    completion_overhead,
    completion_record,
    final_record,
    step_records,
    stress_completion,
)

__all__ = [
    "ApproxTree",
    "CompletionRecord",
    "NearBestReport",
    "NearBestRow",
    "STRATEGIES",
    "SigmaPrimeResult",
    "StepRecord",
    "TreeNode",
    "VARIANT_BUDGET",
    "VARIANT_THRESHOLD",
    "completion_overhead",
    "completion_record",
    "final_record",
    "harmonic_indicator",
    "near_best_report",
    "sigma_prime",
    "step_records",
    "stress_completion",
    "tree_budget",
    "tree_budget_schedule",
    "tree_threshold",
]
