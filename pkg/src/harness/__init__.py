"""ε-sweep harness: limit comparisons, rate fits, reports and acceptance checks."""

from src.harness.acceptance import CriterionResult, evaluate_damping, evaluate_sweep, self_checks
from src.harness.compare import NormTable, compare_to_limit
from src.harness.rates import RateFit, fit_rate
from src.harness.sweep import MemberSummary, RateReport, SweepConfig, run_sweep

__all__ = [
    "CriterionResult",
    "MemberSummary",
    "NormTable",
    "RateFit",
    "RateReport",
    "SweepConfig",
    "compare_to_limit",
    "evaluate_damping",
    "evaluate_sweep",
    "fit_rate",
    "run_sweep",
    "self_checks",
]
