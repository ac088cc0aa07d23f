"""Decompose, plan in parallel, merge: multi-constraint itinerary planning."""

from .constraints import EvaluationReport, RuleVerdict, evaluate_plan, evaluate_subplan
from .domain import Plan, Query, ReferenceDatabase, SubPlan, load_instance, total_cost
from .generator import SizeParams, generate_instance
from .harness import RunConfig, RunReport, emit_report, run_strategy
from .metrics import Metrics, compute_metrics
from .oracle import brute_force_oracle

__all__ = [
    "EvaluationReport",
    "Metrics",
    "Plan",
    "Query",
    "ReferenceDatabase",
    "RuleVerdict",
    "RunConfig",
    "RunReport",
    "SizeParams",
    "SubPlan",
    "brute_force_oracle",
    "compute_metrics",
    "emit_report",
    "evaluate_plan",
    "evaluate_subplan",
    "generate_instance",
    "load_instance",
    "run_strategy",
    "total_cost",
]
