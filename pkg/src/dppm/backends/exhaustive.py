"""Deterministic backend that searches the whole assignment space."""

from __future__ import annotations

import threading
from dataclasses import replace
from typing import Optional

from ..constraints import EvaluationReport, evaluate_plan
from ..decompose import Subtask
from ..domain import ASPECT_FIELDS, ASPECTS, Plan, Query, ReferenceDatabase, SubPlan, resolvable_cost
from .assignments import Assignment, passing_assignments, replace_aspect
from .base import Item, NoCandidates, PlannerBackend, RefineContext

# which aspects can influence a failing rule
_RULE_ASPECTS = {
    "minimum_nights_stay": ("accommodation",),
    "room_rule": ("accommodation",),
    "room_type": ("accommodation",),
    "cuisine": ("meals",),
    "diverse_restaurants": ("meals",),
    "diverse_attractions": ("attraction",),
    "non_conflicting_transportation": ("transportation",),
    "transportation_preference": ("transportation",),
}
_FIELD_ASPECTS = {
    "transportation": "transportation",
    "breakfast": "meals",
    "lunch": "meals",
    "dinner": "meals",
    "attraction": "attraction",
    "accommodation": "accommodation",
}


def describe(aspect: str, plan_id: int, cost: int) -> str:
    return f"{aspect.capitalize()} plan {plan_id}, estimated cost ${cost}."


def ranked_candidates(subtask: Subtask, db: ReferenceDatabase) -> list[Assignment]:
    """Locally passing assignments in backend preference order."""
    query = subtask.query_view
    ranked = list(passing_assignments(subtask.aspect, query, db, subtask.cost_aware))
    if subtask.prior is not None and subtask.cost_aware:
        # sequential planning: prefer what still fits in the remaining budget
        spent = resolvable_cost(subtask.prior, db, query)
        ranked.sort(key=lambda a: spent + a.cost > query.budget)
    return ranked


class ExhaustiveBackend(PlannerBackend):
    """Returns the K best locally passing subplans; refines by trying every
    replacement of one aspect and keeping the one with the fewest failures."""

    def __init__(self) -> None:
        self._memo: dict = {}
        self._lock = threading.Lock()

    def generate_local(self, subtask: Subtask, db: ReferenceDatabase) -> list[SubPlan]:
        ranked = ranked_candidates(subtask, db)
        if not ranked:
            raise NoCandidates(f"no {subtask.aspect} assignment passes the local rules")
        return [a.subplan(i, describe(a.aspect, i, a.cost)) for i, a in enumerate(ranked[: subtask.candidate_count], start=1)]

    def generate_plan(self, query: Query, db: ReferenceDatabase, cost_aware: bool = True) -> Plan:
        plan = Plan.blank(query.n_days)
        for aspect in ASPECTS:
            ranked = passing_assignments(aspect, query, db, cost_aware)
            if not ranked:
                raise NoCandidates(f"no {aspect} assignment passes the local rules")
            plan = replace_aspect(plan, aspect, ranked[0].entries)
        return plan

    def refine(self, item: Item, report: EvaluationReport, context: RefineContext) -> Item:
        key = (item, context.rule_filter, context.aspects, context.cost_aware, context.query, id(context.db))
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        result = self._refine(item, report, context)
        with self._lock:
            self._memo[key] = result
        return result

    def _refine(self, item: Item, report: EvaluationReport, context: RefineContext) -> Item:
        query, db = context.query, context.db
        if isinstance(item, SubPlan):
            for a in passing_assignments(item.aspect, query, db, context.cost_aware):
                if a.entries != item.entries:
                    return item.with_entries(a.entries)
            return item

        targets = self._implicated(report, context.aspects)
        best: Optional[tuple] = None
        for rank, aspect in enumerate(targets):
            for order, a in enumerate(passing_assignments(aspect, query, db, context.cost_aware)):
                candidate = replace_aspect(item, aspect, a.entries)
                if candidate == item:
                    continue
                fails = evaluate_plan(candidate, query, db, context.rule_filter).fail_count
                cost = resolvable_cost(candidate, db, query) if context.cost_aware else 0
                score = (fails, cost, rank, order)
                if best is None or score < best[0]:
                    best = (score, candidate)
        if best is None or best[0][0] >= report.fail_count:
            return item
        return best[1]

    @staticmethod
    def _implicated(report: EvaluationReport, allowed: tuple[str, ...]) -> list[str]:
        picked: list[str] = []
        for v in report.failures():
            if v.rule in _RULE_ASPECTS:
                names = _RULE_ASPECTS[v.rule]
            elif v.rule == "budget":
                names = allowed
            else:
                names = tuple(_FIELD_ASPECTS[f] for _, f in v.locations if f in _FIELD_ASPECTS)
            picked.extend(n for n in names if n in allowed and n not in picked)
        return picked or list(allowed)

    def merge_pair(self, base, addition, reports, context) -> Plan:
        return keep_route_merge(base, addition)


def keep_route_merge(base: Plan, addition: SubPlan) -> Plan:
    """Mechanical merge that copies the addition's fields and keeps the base route."""
    fields = ASPECT_FIELDS[addition.aspect]
    return Plan(
        tuple(
            replace(mine, **{f: getattr(theirs, f) for f in fields})
            for mine, theirs in zip(base.entries, addition.entries)
        )
    )
