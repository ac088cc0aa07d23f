"""Cartesian combination of aspect candidates and staged merging."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from .backends.base import GenerationFailure, PlannerBackend, RefineContext
from .constraints import FAIL, EvaluationReport, RuleVerdict, evaluate_plan, local_selectors
from .domain import (
    ASPECT_FIELDS,
    ASPECTS,
    PLACEHOLDER,
    DayEntry,
    Plan,
    PlanStructureError,
    Query,
    ReferenceDatabase,
    SubPlan,
    resolvable_cost,
    validate_structure,
)
from .refine import RefineBudget, TraceLog, refine_loop

STAGES: tuple[tuple[str, ...], ...] = (("transportation", "attraction"), ("accommodation",), ("meals",))

# global rules that make sense on a partial plan, per stage
_STAGE_GLOBALS = (
    frozenset({"reasonable_city_route", "within_current_city", "budget"}),
    frozenset({"reasonable_city_route", "within_current_city", "budget", "minimum_nights_stay"}),
)


class DoubleAssignment(ValueError):
    """A subplan tried to fill a field the base plan already holds."""


@dataclass(frozen=True)
class Candidate:
    subplan: SubPlan
    report: EvaluationReport
    cost: int

    @classmethod
    def build(cls, sub: SubPlan, report: EvaluationReport, query: Query, db: ReferenceDatabase) -> "Candidate":
        return cls(sub, report, resolvable_cost(sub.as_plan(), db, query))


@dataclass(frozen=True)
class MergeCombination:
    candidates: tuple[Candidate, ...]  # in ASPECTS order

    def __post_init__(self) -> None:
        if tuple(c.subplan.aspect for c in self.candidates) != ASPECTS:
            raise ValueError("a combination needs exactly one candidate per aspect, in aspect order")

    @property
    def priority_key(self) -> tuple:
        return (
            -sum(c.report.pass_count for c in self.candidates),
            sum(c.cost for c in self.candidates),
            tuple(c.subplan.plan_id for c in self.candidates),
        )

    def plan_ids(self) -> tuple[int, ...]:
        return tuple(c.subplan.plan_id for c in self.candidates)

    def get(self, aspect: str) -> Candidate:
        return self.candidates[ASPECTS.index(aspect)]


@dataclass(frozen=True)
class MergeResult:
    plan: Plan
    report: EvaluationReport
    combination: MergeCombination
    stages_refined: tuple[int, ...]
    cost: int = 0
    failure: Optional[str] = None
    trace: tuple[dict, ...] = ()


@dataclass(frozen=True)
class MergeConfig:
    merge_cap: int = 30
    cartesian_enabled: bool = True
    refine_cap: int = 10
    cost_aware: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.merge_cap < 1:
            raise ValueError("merge cap must be at least 1")
        if self.refine_cap < 0:
            raise ValueError("refine cap must be non-negative")
        if self.workers < 1:
            raise ValueError("merge workers must be at least 1")


def enumerate_combinations(
    candidates: Mapping[str, Sequence[Candidate]],
    cap: int,
    cartesian_enabled: bool = True,
) -> list[MergeCombination]:
    for aspect in ASPECTS:
        if not candidates.get(aspect):
            raise ValueError(f"no candidates for {aspect}")
    if not cartesian_enabled:
        return [MergeCombination(tuple(candidates[a][0] for a in ASPECTS))]
    combos = [MergeCombination(c) for c in itertools.product(*(candidates[a] for a in ASPECTS))]
    combos.sort(key=lambda c: c.priority_key)
    return combos[:cap]


def overlay(base: Plan, sub: SubPlan) -> tuple[Plan, list[tuple[int, str, str]]]:
    """Field-wise union of ``base`` and ``sub``.

    Returns the merged plan and the (day, kept, dropped) current_city
    mismatches.  The transportation subplan's route always wins.
    """
    if len(base.entries) != len(sub.entries):
        raise ValueError("plans differ in length")
    fields = ASPECT_FIELDS[sub.aspect]
    entries: list[DayEntry] = []
    conflicts = []
    for mine, theirs in zip(base.entries, sub.entries):
        taken = [f for f in fields if getattr(mine, f) != PLACEHOLDER]
        if taken:
            raise DoubleAssignment(f"day {mine.days}: {', '.join(taken)} already set")
        city = mine.current_city
        if theirs.current_city != PLACEHOLDER and theirs.current_city != city:
            if city == PLACEHOLDER:
                city = theirs.current_city
            elif sub.aspect == "transportation":
                conflicts.append((mine.days, theirs.current_city, city))
                city = theirs.current_city
            else:
                conflicts.append((mine.days, city, theirs.current_city))
        entries.append(replace(mine, current_city=city, **{f: getattr(theirs, f) for f in fields}))
    return Plan(tuple(entries)), conflicts


def conflict_verdict(conflicts: Sequence[tuple[int, str, str]]) -> RuleVerdict:
    lines = [f"[within_current_city] day {d}: {b!r} — route disagrees with {a!r}" for d, a, b in conflicts]
    return RuleVerdict("within_current_city", FAIL, "\n".join(lines), tuple((d, "current_city") for d, _, _ in conflicts))


def stage_filter(stage: int, merged: Sequence[str]) -> Optional[frozenset[str]]:
    """Rules checked after ``stage`` (0-based); None means the full catalog."""
    if stage >= len(_STAGE_GLOBALS):
        return None
    rules = set(_STAGE_GLOBALS[stage])
    for aspect in merged:
        rules |= local_selectors(aspect)
    return frozenset(rules)


def staged_merge(
    combination: MergeCombination,
    backend: PlannerBackend,
    query: Query,
    db: ReferenceDatabase,
    config: MergeConfig = MergeConfig(),
    budget: Optional[RefineBudget] = None,
) -> MergeResult:
    trace = TraceLog(combination=list(combination.plan_ids()))
    plan = Plan.blank(query.n_days)
    merged: list[str] = []
    refined = []
    failure = None
    for index, stage in enumerate(STAGES):
        for aspect in stage:
            cand = combination.get(aspect)
            base = plan
            plan, conflicts = overlay(base, cand.subplan)
            if conflicts:
                partial = evaluate_plan(base, query, db, stage_filter(index, merged) if merged else frozenset())
                sub_report = EvaluationReport(cand.report.verdicts + (conflict_verdict(conflicts),))
                context = RefineContext(query, db, None, tuple(merged + [aspect]), config.cost_aware)
                try:
                    reconciled = backend.merge_pair(base, cand.subplan, (partial, sub_report), context)
                    validate_structure(reconciled.entries, query.n_days)
                    plan = reconciled
                except (GenerationFailure, PlanStructureError) as exc:
                    # keep the mechanical overlay and let the stage refine work on it
                    failure = failure or str(exc)
                trace.tagged(stage=index + 1).record(0, plan, None, note=f"merge_pair {aspect}")
            merged.append(aspect)
        rules = stage_filter(index, merged)
        context = RefineContext(query, db, rules, tuple(merged), config.cost_aware)
        outcome = refine_loop(plan, rules, backend, config.refine_cap, context, trace.tagged(stage=index + 1), budget)
        plan = outcome.final
        refined.append(outcome.iterations_used)
        failure = failure or outcome.failure
    report = evaluate_plan(plan, query, db)
    cost = resolvable_cost(plan, db, query)
    return MergeResult(plan, report, combination, tuple(refined), cost, failure, tuple(trace.records))


def select_final(results: Sequence[MergeResult]) -> MergeResult:
    """First all-pass result, else most passes, then cheaper, then earlier."""
    if not results:
        raise ValueError("select_final needs at least one merge result")
    for r in results:
        if r.report.all_pass:
            return r
    best = min(range(len(results)), key=lambda i: (-results[i].report.pass_count, results[i].cost, i))
    return results[best]


def run_merge(
    candidates: Mapping[str, Sequence[Candidate]],
    backend: PlannerBackend,
    query: Query,
    db: ReferenceDatabase,
    config: MergeConfig = MergeConfig(),
    budget: Optional[RefineBudget] = None,
) -> tuple[MergeResult, list[MergeResult]]:
    """Merge combinations in priority order until one passes everything.

    With several workers, combinations are merged in batches; everything
    after the first all-pass result is discarded, so the selection matches
    a sequential run.
    """
    combos = enumerate_combinations(candidates, config.merge_cap, config.cartesian_enabled)
    results: list[MergeResult] = []

    def one(combo: MergeCombination) -> MergeResult:
        return staged_merge(combo, backend, query, db, config, budget)

    if config.workers == 1:
        for combo in combos:
            results.append(one(combo))
            if results[-1].report.all_pass:
                break
    else:
        with ThreadPoolExecutor(config.workers) as pool:
            for start in range(0, len(combos), config.workers):
                batch = list(pool.map(one, combos[start : start + config.workers]))
                results.extend(batch)
                if any(r.report.all_pass for r in batch):
                    break
        for i, r in enumerate(results):
            if r.report.all_pass:
                del results[i + 1 :]
                break
    return select_final(results), results
