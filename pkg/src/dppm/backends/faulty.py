"""Fault-injecting backend.

Wraps the exhaustive backend and, with probability ``p`` per candidate,
corrupts one field so that the candidate breaks one of its own local rules.
``refine`` repairs one reported violation per call.  Every random draw is
derived from the seed and the content involved, so results do not depend on
call order or thread scheduling.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from ..constraints import EvaluationReport
from ..decompose import Subtask
from ..domain import (
    ASPECT_FIELDS,
    ASPECTS,
    CONTENT_FIELDS,
    MEAL_FIELDS,
    PLACEHOLDER,
    Plan,
    Query,
    ReferenceDatabase,
    SubPlan,
    day_city,
    parse_leg,
    parse_route,
    render_leg,
    render_place,
)
from .base import Item, PlannerBackend, RefineContext, derived_rng, query_key
from .exhaustive import ExhaustiveBackend, keep_route_merge
from .greedy import cheapest
from .repair import repair_one


def _fictitious(plan: Plan, day: int, field_name: str, rng) -> Optional[str]:
    entry = plan.entries[day - 1]
    tag = rng.randrange(1000, 10000)
    if field_name == "transportation":
        route = parse_route(entry.current_city)
        if route is None or route[1] is None:
            return None
        return render_leg("flight", f"F9{tag}", route[0], route[1])
    city = day_city(entry.current_city)
    label = {"accommodation": "Hotel", "attraction": "Landmark"}.get(field_name, "Diner")
    return render_place(f"Imaginary {label} {tag}", city)


def _duplicate(plan: Plan, aspect: str, rng) -> Optional[Plan]:
    if aspect == "meals":
        filled = [(e.days, m, getattr(e, m)) for e in plan.entries for m in MEAL_FIELDS if getattr(e, m) != PLACEHOLDER]
        if len(filled) < 2:
            return None
        (day, meal, _), (_, _, value) = rng.sample(filled, 2)
        return plan.with_field(day, meal, value)
    if aspect == "attraction":
        filled = [(e.days, e.attraction) for e in plan.entries if e.attraction != PLACEHOLDER]
        if len(filled) < 2:
            return None
        (day, _), (_, value) = rng.sample(filled, 2)
        return plan.with_field(day, "attraction", value)
    return None


def _break_requirement(plan: Plan, aspect: str, query: Query, db: ReferenceDatabase, rng) -> Optional[Plan]:
    if aspect == "transportation":
        days = [e.days for e in plan.entries if e.transportation != PLACEHOLDER]
        modes = {}
        for e in plan.entries:
            parsed = parse_leg(e.transportation) if e.transportation != PLACEHOLDER else None
            if parsed:
                modes[e.days] = parsed[0]
        options = []
        for day in days:
            a, b = parse_route(plan.entries[day - 1].current_city)
            for leg in db.legs_between(a, b, day):
                others = {m for d, m in modes.items() if d != day}
                banned = query.required_transport and leg.mode == query.required_transport[3:]
                clash = {leg.mode} | others >= {"flight", "self-driving"}
                if banned or clash:
                    options.append((day, leg.render()))
        if not options:
            return None
        day, value = rng.choice(sorted(options))
        return plan.with_field(day, "transportation", value)
    if aspect == "accommodation" and (query.required_room_type or query.required_house_rule):
        options = []
        for e in plan.entries:
            if e.accommodation == PLACEHOLDER:
                continue
            for h in db.hotels_in(day_city(e.current_city)):
                wrong_type = query.required_room_type and h.room_type != query.required_room_type
                wrong_rule = query.required_house_rule and "no_" + query.required_house_rule in h.house_rules
                if wrong_type or wrong_rule:
                    options.append((e.days, h.render()))
        if not options:
            return None
        day, value = rng.choice(sorted(options))
        return plan.with_field(day, "accommodation", value)
    return _duplicate(plan, aspect, rng)


def corrupt(sub: SubPlan, query: Query, db: ReferenceDatabase, rng) -> SubPlan:
    """Make ``sub`` violate one of its local rules."""
    plan = sub.as_plan()
    if rng.random() < 0.5:
        broken = _break_requirement(plan, sub.aspect, query, db, rng)
        if broken is not None and broken != plan:
            return sub.with_entries(broken.entries)
    slots = [
        (e.days, f)
        for e in plan.entries
        for f in ASPECT_FIELDS[sub.aspect]
        if (f == "transportation" and parse_route(e.current_city)[1] is not None)
        or (f != "transportation" and e.days < query.n_days)
    ]
    day, f = rng.choice(slots)
    value = _fictitious(plan, day, f, rng)
    return sub.with_entries(plan.with_field(day, f, value).entries)


class FaultyBackend(PlannerBackend):
    def __init__(self, p: float = 0.3, seed: int = 0) -> None:
        if not 0.0 <= p <= 1.0:
            raise ValueError("fault probability must lie in [0, 1]")
        self.p = p
        self.seed = seed
        self._inner = ExhaustiveBackend()

    def _faulted(self, sub: SubPlan, query: Query, db: ReferenceDatabase, *salt) -> SubPlan:
        rng = derived_rng(self.seed, "gen", query_key(query), sub.aspect, sub.plan_id, *salt)
        if rng.random() < self.p:
            return corrupt(sub, query, db, rng)
        return sub

    def corruption_mask(self, subtask: Subtask, db: ReferenceDatabase) -> list[bool]:
        clean = self._inner.generate_local(subtask, db)
        return [self._faulted(s, subtask.query_view, db) != s for s in clean]

    def generate_local(self, subtask: Subtask, db: ReferenceDatabase) -> list[SubPlan]:
        clean = self._inner.generate_local(subtask, db)
        return [self._faulted(s, subtask.query_view, db) for s in clean]

    def generate_plan(self, query: Query, db: ReferenceDatabase, cost_aware: bool = True) -> Plan:
        plan = self._inner.generate_plan(query, db, cost_aware)
        for aspect in ASPECTS:
            sub = SubPlan(aspect, 1, "", _project(plan, aspect))
            sub = self._faulted(sub, query, db, "direct")
            plan = keep_route_merge(plan, sub)
        return plan

    def refine(self, item: Item, report: EvaluationReport, context: RefineContext) -> Item:
        plan = item.as_plan() if isinstance(item, SubPlan) else item
        if context.cost_aware:
            choose = cheapest
        else:
            def choose(options, tag):
                rng = derived_rng(self.seed, "refine", plan.fingerprint(), tag)
                return rng.choice(sorted(options))[0]
        fixed = repair_one(plan, report, context.query, context.db, context.aspects, choose)
        if fixed is None:
            return item
        return item.with_entries(fixed.entries) if isinstance(item, SubPlan) else fixed

    def merge_pair(self, base, addition, reports, context) -> Plan:
        return keep_route_merge(base, addition)


def _project(plan: Plan, aspect: str):
    keep = set(ASPECT_FIELDS[aspect])
    return tuple(replace(e, **{f: PLACEHOLDER for f in CONTENT_FIELDS if f not in keep}) for e in plan.entries)
