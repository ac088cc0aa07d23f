"""Slot-level repairs shared by the greedy and fault-injecting backends.

A repair fixes exactly one failing verdict by rewriting the offending slot(s).
Which replacement is picked is up to the caller's ``choose`` function: the
greedy backend takes the cheapest, the faulty backend a seeded random one.
Budget failures have no single offending slot; only ``repair_budget`` (used by
the greedy backend) attempts them.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from ..constraints import FAIL, EvaluationReport, RuleVerdict
from ..domain import (
    ASPECT_FIELDS,
    MEAL_FIELDS,
    PLACEHOLDER,
    Plan,
    Query,
    ReferenceDatabase,
    day_city,
    parse_leg,
    parse_place,
    parse_route,
    route_skeleton,
    split_attractions,
)

Option = tuple[str, int]  # (rendered value, cost)
Chooser = Callable[[Sequence[Option], str], Optional[str]]

FIELD_ASPECT = {f: aspect for aspect, fs in ASPECT_FIELDS.items() for f in fs}


def _used(plan: Plan, fields: Sequence[str], skip: tuple[int, str]) -> set[str]:
    seen = set()
    for e in plan.entries:
        for f in fields:
            if (e.days, f) == skip:
                continue
            text = getattr(e, f)
            if f == "attraction":
                seen.update(split_attractions(text))
            elif text != PLACEHOLDER:
                seen.add(text.strip())
    return seen


def slot_options(plan: Plan, day: int, field_name: str, query: Query, db: ReferenceDatabase) -> list[Option]:
    """Replacements for one slot that satisfy that slot's own rules."""
    entry = plan.entries[day - 1]
    skeleton = route_skeleton(query)
    city = day_city(entry.current_city) or day_city(skeleton[day - 1])
    people = query.n_people
    current = getattr(entry, field_name).strip()
    if field_name == "transportation":
        route = parse_route(entry.current_city) or parse_route(skeleton[day - 1])
        if route is None or route[1] is None:
            return []
        banned = {query.required_transport[3:]} if query.required_transport else set()
        other_modes = set()
        for e in plan.entries:
            parsed = parse_leg(e.transportation) if e.days != day and e.transportation != PLACEHOLDER else None
            leg = db.leg(parsed[1]) if parsed else None
            if leg is not None:
                other_modes.add(leg.mode)
        if "flight" in other_modes:
            banned.add("self-driving")
        if "self-driving" in other_modes:
            banned.add("flight")
        return [
            (leg.render(), leg.price_per_person * people)
            for leg in db.legs_between(route[0], route[1], day)
            if leg.mode not in banned and leg.render() != current
        ]
    if field_name in MEAL_FIELDS:
        taken = _used(plan, MEAL_FIELDS, (day, field_name))
        return [
            (r.render(), r.avg_cost_per_person * people)
            for r in db.restaurants_in(city)
            if r.render() not in taken and r.render() != current
        ]
    if field_name == "attraction":
        taken = _used(plan, ("attraction",), (day, field_name))
        return [(a.render(), 0) for a in db.attractions_in(city) if a.render() not in taken and a.render() != current]
    if field_name == "accommodation":
        out = []
        for h in db.hotels_in(city):
            if query.required_room_type and h.room_type != query.required_room_type:
                continue
            if query.required_house_rule and "no_" + query.required_house_rule in h.house_rules:
                continue
            if h.render() != current:
                out.append((h.render(), h.price_per_night * h.rooms_needed(people)))
        return out
    return []


def _repair_slot(plan, day, field_name, query, db, choose) -> Optional[Plan]:
    final = day == query.n_days
    if field_name == "accommodation" and final:
        return plan.with_field(day, field_name, PLACEHOLDER)
    if field_name == "transportation":
        route = parse_route(plan.entries[day - 1].current_city)
        if route is not None and route[1] is None:
            return plan.with_field(day, field_name, PLACEHOLDER)
    options = slot_options(plan, day, field_name, query, db)
    if not options:
        if field_name == "attraction" or (final and field_name in MEAL_FIELDS):
            return plan.with_field(day, field_name, PLACEHOLDER)
        return None
    value = choose(options, f"{day}:{field_name}")
    return None if value is None else plan.with_field(day, field_name, value)


def _repair_min_nights(plan, verdict, query, db, choose) -> Optional[Plan]:
    # re-book the whole stretch of nights spent in that city at one hotel
    first = verdict.locations[0][0]
    city = day_city(plan.entries[first - 1].current_city)
    block = [
        e.days for e in plan.entries
        if e.days < query.n_days and day_city(e.current_city) == city
    ]
    options = []
    for h in db.hotels_in(city):
        if query.required_room_type and h.room_type != query.required_room_type:
            continue
        if query.required_house_rule and "no_" + query.required_house_rule in h.house_rules:
            continue
        if h.minimum_nights <= len(block):
            options.append((h.render(), h.price_per_night * h.rooms_needed(query.n_people) * len(block)))
    if not options:
        return None
    value = choose(options, "min_nights")
    if value is None:
        return None
    for d in block:
        plan = plan.with_field(d, "accommodation", value)
    return plan


def _repair_cuisine(plan, verdict, query, db, choose) -> Optional[Plan]:
    served = set()
    for e in plan.entries:
        for m in MEAL_FIELDS:
            place = parse_place(getattr(e, m)) if getattr(e, m) != PLACEHOLDER else None
            r = db.restaurant(*place) if place else None
            if r is not None:
                served |= r.cuisines
    missing = sorted(query.required_cuisines - served)
    if not missing:
        return None
    options = []
    for day in range(1, query.n_days):
        for m in MEAL_FIELDS:
            for text, cost in slot_options(plan, day, m, query, db):
                r = db.restaurant(*parse_place(text))
                if missing[0] in r.cuisines:
                    options.append((f"{day}|{m}|{text}", cost))
    if not options:
        return None
    value = choose(options, "cuisine")
    if value is None:
        return None
    day, meal, text = value.split("|", 2)
    return plan.with_field(int(day), meal, text)


def _reset_route(plan: Plan, query: Query) -> Optional[Plan]:
    skeleton = route_skeleton(query)
    if tuple(e.current_city for e in plan.entries) == skeleton:
        return None
    for day, city in enumerate(skeleton, start=1):
        plan = plan.with_field(day, "current_city", city)
    return plan


def repair_verdict(
    plan: Plan,
    verdict: RuleVerdict,
    query: Query,
    db: ReferenceDatabase,
    aspects: Sequence[str],
    choose: Chooser,
) -> Optional[Plan]:
    """Fix one failing verdict, touching only fields of ``aspects``.
    Returns None when the verdict cannot be fixed this way."""
    editable = {f for a in aspects for f in ASPECT_FIELDS[a]}
    rule = verdict.rule
    if rule == "budget":
        return None
    if rule == "reasonable_city_route":
        return _reset_route(plan, query)
    if rule == "minimum_nights_stay":
        return _repair_min_nights(plan, verdict, query, db, choose) if "accommodation" in editable else None
    if rule == "cuisine":
        return _repair_cuisine(plan, verdict, query, db, choose) if "breakfast" in editable else None
    for day, field_name in verdict.locations:
        if field_name == "current_city":
            fixed = _reset_route(plan, query)
        elif field_name in editable:
            fixed = _repair_slot(plan, day, field_name, query, db, choose)
        else:
            continue
        if fixed is not None and fixed != plan:
            return fixed
    return None


def repair_one(
    plan: Plan,
    report: EvaluationReport,
    query: Query,
    db: ReferenceDatabase,
    aspects: Sequence[str],
    choose: Chooser,
) -> Optional[Plan]:
    """Repair the first failing verdict that admits a repair."""
    for verdict in report.verdicts:
        if verdict.status != FAIL:
            continue
        fixed = repair_verdict(plan, verdict, query, db, aspects, choose)
        if fixed is not None:
            return fixed
    return None


def repair_budget(plan: Plan, query: Query, db: ReferenceDatabase, aspects: Sequence[str]) -> Optional[Plan]:
    """Swap the slot whose cheapest replacement saves the most money."""
    editable = [f for a in aspects for f in ASPECT_FIELDS[a] if f != "attraction"]
    best = None
    for e in plan.entries:
        for f in editable:
            text = getattr(e, f)
            if text == PLACEHOLDER:
                continue
            current_cost = _slot_cost(text, f, query, db)
            for value, cost in slot_options(plan, e.days, f, query, db):
                saving = current_cost - cost
                if saving > 0 and (best is None or saving > best[0]):
                    best = (saving, e.days, f, value)
    if best is None:
        return None
    _, day, f, value = best
    return plan.with_field(day, f, value)


def _slot_cost(text: str, field_name: str, query: Query, db: ReferenceDatabase) -> int:
    if field_name == "transportation":
        parsed = parse_leg(text)
        leg = db.leg(parsed[1]) if parsed else None
        return leg.price_per_person * query.n_people if leg else 0
    place = parse_place(text)
    if place is None:
        return 0
    if field_name == "accommodation":
        h = db.hotel(*place)
        return h.price_per_night * h.rooms_needed(query.n_people) if h else 0
    r = db.restaurant(*place)
    return r.avg_cost_per_person * query.n_people if r else 0
