"""Slot-by-slot cheapest-choice backend with local repair."""

from __future__ import annotations

from ..constraints import FAIL, EvaluationReport
from ..decompose import Subtask
from ..domain import (
    ASPECT_FIELDS,
    MERGE_ORDER,
    Plan,
    Query,
    ReferenceDatabase,
    SubPlan,
    parse_route,
    resolvable_cost,
    route_skeleton,
)
from .base import Item, NoCandidates, PlannerBackend, RefineContext
from .exhaustive import describe, keep_route_merge
from .repair import repair_budget, repair_one, slot_options


def cheapest(options, tag=""):
    return min(options, key=lambda o: (o[1], o[0]))[0] if options else None


def _slots(aspect: str, query: Query) -> list[tuple[int, str]]:
    skeleton = route_skeleton(query)
    n = len(skeleton)
    out = []
    for day, city in enumerate(skeleton, start=1):
        for f in ASPECT_FIELDS[aspect]:
            if f == "transportation" and parse_route(city)[1] is None:
                continue
            if f != "transportation" and day == n:
                # nothing to plan after heading home
                continue
            out.append((day, f))
    return out


def greedy_fill(plan: Plan, aspect: str, query: Query, db: ReferenceDatabase, variant: int = 0, cost_aware: bool = True) -> Plan:
    """Fill one aspect slot by slot; ``variant`` picks the v-th option at the first slot."""
    for i, (day, f) in enumerate(_slots(aspect, query)):
        options = sorted(slot_options(plan, day, f, query, db), key=lambda o: (o[1], o[0]) if cost_aware else (o[0],))
        if not options:
            continue
        pick = options[min(variant, len(options) - 1)] if i == 0 else options[0]
        plan = plan.with_field(day, f, pick[0])
    return plan


class GreedyBackend(PlannerBackend):
    def generate_local(self, subtask: Subtask, db: ReferenceDatabase) -> list[SubPlan]:
        query = subtask.query_view
        seen: list[Plan] = []
        for v in range(subtask.candidate_count):
            plan = greedy_fill(Plan.skeleton(query), subtask.aspect, query, db, v, subtask.cost_aware)
            if plan not in seen:
                seen.append(plan)
        if all(not p.aspect_present(subtask.aspect) for p in seen):
            raise NoCandidates(f"no {subtask.aspect} options in the reference data")
        out = []
        for i, plan in enumerate(seen, start=1):
            out.append(SubPlan(subtask.aspect, i, describe(subtask.aspect, i, resolvable_cost(plan, db, query)), plan.entries))
        return out

    def generate_plan(self, query: Query, db: ReferenceDatabase, cost_aware: bool = True) -> Plan:
        plan = Plan.skeleton(query)
        for aspect in MERGE_ORDER:
            plan = greedy_fill(plan, aspect, query, db, 0, cost_aware)
        return plan

    def refine(self, item: Item, report: EvaluationReport, context: RefineContext) -> Item:
        plan = item.as_plan() if isinstance(item, SubPlan) else item
        fixed = repair_one(plan, report, context.query, context.db, context.aspects, cheapest)
        budget = report.verdict("budget")
        if fixed is None and budget is not None and budget.status == FAIL:
            fixed = repair_budget(plan, context.query, context.db, context.aspects)
        if fixed is None:
            return item
        return item.with_entries(fixed.entries) if isinstance(item, SubPlan) else fixed

    def merge_pair(self, base, addition, reports, context) -> Plan:
        return keep_route_merge(base, addition)
