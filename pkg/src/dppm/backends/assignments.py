"""Enumeration of single-aspect assignments over the canonical route.

Used by the deterministic backends as their "search space".  Meal slots
within one city are filled from a *set* of restaurants in name order, since
no rule depends on which slot a restaurant occupies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import lru_cache

from ..constraints import evaluate_subplan
from ..domain import (
    ASPECT_FIELDS,
    MEAL_FIELDS,
    PLACEHOLDER,
    DayEntry,
    Plan,
    Query,
    ReferenceDatabase,
    SubPlan,
    day_city,
    parse_route,
    resolvable_cost,
    route_skeleton,
)


@dataclass(frozen=True)
class Assignment:
    aspect: str
    entries: tuple[DayEntry, ...]
    cost: int

    @property
    def values(self) -> tuple[str, ...]:
        return tuple(getattr(e, f) for e in self.entries for f in ASPECT_FIELDS[self.aspect])

    def order_key(self, cost_aware: bool) -> tuple:
        values = self.values
        empties = sum(v == PLACEHOLDER for v in values)
        return (self.cost, empties, values) if cost_aware else (empties, values)

    def subplan(self, plan_id: int, description: str = "") -> SubPlan:
        return SubPlan(self.aspect, plan_id, description, self.entries)


def _entries(skeleton: tuple[str, ...], fills: dict[int, dict[str, str]]) -> tuple[DayEntry, ...]:
    return tuple(DayEntry(days=d, current_city=city, **fills.get(d, {})) for d, city in enumerate(skeleton, start=1))


def _raw(aspect: str, query: Query, db: ReferenceDatabase) -> list[tuple[DayEntry, ...]]:
    skeleton = route_skeleton(query)
    n = len(skeleton)
    cities = [day_city(c) for c in skeleton]
    if aspect == "transportation":
        slots = []
        for day, text in enumerate(skeleton, start=1):
            a, b = parse_route(text)
            if b is not None:
                slots.append((day, [leg.render() for leg in db.legs_between(a, b, day)]))
        return [
            _entries(skeleton, {day: {"transportation": v} for (day, _), v in zip(slots, choice)})
            for choice in itertools.product(*(opts for _, opts in slots))
        ]
    if aspect == "accommodation":
        options = [[h.render() for h in db.hotels_in(cities[d - 1])] for d in range(1, n)]
        return [
            _entries(skeleton, {d: {"accommodation": v} for d, v in enumerate(choice, start=1)})
            for choice in itertools.product(*options)
        ]
    if aspect == "attraction":
        options = [[PLACEHOLDER] + [a.render() for a in db.attractions_in(cities[d - 1])] for d in range(1, n)]
        return [
            _entries(skeleton, {d: {"attraction": v} for d, v in enumerate(choice, start=1)})
            for choice in itertools.product(*options)
        ]
    if aspect == "meals":
        # group non-final days by city; each group takes a set of restaurants
        groups: dict[str, list[int]] = {}
        for d in range(1, n):
            groups.setdefault(cities[d - 1], []).append(d)
        group_options = []
        for city, days in groups.items():
            names = sorted(r.render() for r in db.restaurants_in(city))
            group_options.append([(days, combo) for combo in itertools.combinations(names, 3 * len(days))])
        home = sorted(r.render() for r in db.restaurants_in(cities[-1]))
        final_options = [combo for k in range(4) for combo in itertools.combinations(home, k)]
        result = []
        for picks in itertools.product(*group_options):
            for final in final_options:
                fills: dict[int, dict[str, str]] = {}
                for days, combo in picks:
                    it = iter(combo)
                    for d in days:
                        fills[d] = {m: next(it) for m in MEAL_FIELDS}
                fills[n] = dict(zip(MEAL_FIELDS, final))
                result.append(_entries(skeleton, fills))
        return result
    raise ValueError(f"unknown aspect {aspect!r}")


@lru_cache(maxsize=2048)
def all_assignments(aspect: str, query: Query, db: ReferenceDatabase) -> tuple[Assignment, ...]:
    """Every structurally valid assignment, with its cost."""
    out = []
    for entries in _raw(aspect, query, db):
        out.append(Assignment(aspect, entries, resolvable_cost(Plan(entries), db, query)))
    return tuple(out)


@lru_cache(maxsize=2048)
def passing_assignments(aspect: str, query: Query, db: ReferenceDatabase, cost_aware: bool) -> tuple[Assignment, ...]:
    """Assignments that pass the aspect's local rules, best first."""
    keep = [a for a in all_assignments(aspect, query, db) if evaluate_subplan(a.subplan(0), query, db).all_pass]
    keep.sort(key=lambda a: a.order_key(cost_aware))
    return tuple(keep)


def replace_aspect(plan: Plan, aspect: str, entries: tuple[DayEntry, ...]) -> Plan:
    """Copy ``aspect``'s fields from ``entries`` into ``plan``."""
    out = []
    for mine, theirs in zip(plan.entries, entries):
        values = {f: getattr(theirs, f) for f in ASPECT_FIELDS[aspect]}
        if parse_route(mine.current_city) is None:
            values["current_city"] = theirs.current_city
        out.append(replace(mine, **values))
    return Plan(tuple(out))
