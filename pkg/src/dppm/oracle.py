"""Brute-force feasibility oracle, written independently of the rule engine.

``plan_passes`` re-derives the all-pass verdict of the full catalog from
scratch (its own parsing, its own cost arithmetic), so tests can pit it
against :func:`dppm.constraints.evaluate_plan`.

``brute_force_oracle`` enumerates single-destination itineraries.  The search
space is reduced only by moves that can never turn a failing plan into a
passing one:

* transport on a travel day must be a leg between exactly those cities on
  that day, and non-travel days carry none;
* hotels must be in the destination;
* destination meals are a *set* of distinct restaurants (slot order is
  irrelevant to every rule), return-day meals a set of origin restaurants;
* attractions are left empty (they cost nothing and can only fail rules).
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from typing import Optional

from .domain import (
    DayEntry,
    Plan,
    Query,
    ReferenceDatabase,
    render_leg,
    render_place,
    render_route,
)

_LEG = re.compile(r"^(Flight Number|Self-driving|Taxi): (\S+), from (.+) to (.+)$")
_MOVE = re.compile(r"^from (.+) to (.+)$")
_LABELS = {"Flight Number": "flight", "Self-driving": "self-driving", "Taxi": "taxi"}
_MEALS = ("breakfast", "lunch", "dinner")


class OracleLimitError(RuntimeError):
    """The instance is too large (or too general) for exhaustive search."""


@dataclass(frozen=True)
class OracleLimits:
    max_combinations: int = 1_000_000


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    witness: Optional[Plan]
    min_cost: Optional[int]
    combinations: int


def _place(text: str):
    name, sep, city = text.strip().rpartition(", ")
    return (name, city) if sep and name and city else None


def _where(text: str):
    text = text.strip()
    if text in ("", "-"):
        return None
    m = _MOVE.match(text)
    return (m.group(1), m.group(2)) if m else (text, None)


def _items(attraction_text: str) -> list[str]:
    if attraction_text.strip() == "-":
        return []
    return [p.strip() for p in attraction_text.split(";") if p.strip()]


def plan_cost(plan: Plan, db: ReferenceDatabase, query: Query) -> int:
    """Cost of every resolvable item (independent arithmetic)."""
    legs = {leg.id: leg for leg in db.transport_legs}
    hotels = {(h.name, h.city): h for h in db.accommodations}
    food = {(r.name, r.city): r for r in db.restaurants}
    cost = 0
    for e in plan.entries:
        if e.transportation != "-":
            m = _LEG.match(e.transportation.strip())
            if m and m.group(2) in legs:
                cost += legs[m.group(2)].price_per_person * query.n_people
        for meal in _MEALS:
            text = getattr(e, meal)
            if text != "-" and _place(text) in food:
                cost += food[_place(text)].avg_cost_per_person * query.n_people
        if e.accommodation != "-" and _place(e.accommodation) in hotels:
            h = hotels[_place(e.accommodation)]
            cost += h.price_per_night * -(-query.n_people // h.max_occupancy)
    return cost


def plan_passes(plan: Plan, db: ReferenceDatabase, query: Query) -> bool:
    """True iff the plan satisfies every rule of the catalog."""
    legs = {leg.id: leg for leg in db.transport_legs}
    hotels = {(h.name, h.city): h for h in db.accommodations}
    food = {(r.name, r.city): r for r in db.restaurants}
    sights = {(a.name, a.city) for a in db.attractions}
    cities = set(db.cities)
    n = len(plan.entries)
    if n != query.n_days or [e.days for e in plan.entries] != list(range(1, n + 1)):
        return False

    here = query.origin
    stops: list[str] = []
    modes: set[str] = set()
    meals_seen: list[str] = []
    sights_seen: list[str] = []
    served: set[str] = set()
    stays: list[tuple[str, int]] = []
    for e in plan.entries:
        final = e.days == n
        where = _where(e.current_city)
        if where is None:
            return False
        start, end = where
        if start not in cities or (end is not None and end not in cities):
            return False
        if start != here or (e.days == 1 and end is None):
            return False
        if end is not None:
            here = end
            if end != query.origin:
                stops.append(end)
        city = end if end is not None else start

        # transport
        if e.transportation == "-":
            if end is not None:
                return False
        else:
            if end is None:
                return False
            m = _LEG.match(e.transportation.strip())
            if not m:
                return False
            leg = legs.get(m.group(2))
            if leg is None or leg.mode != _LABELS[m.group(1)]:
                return False
            if (leg.from_city, leg.to_city) != (m.group(3), m.group(4)) or leg.day_available != e.days:
                return False
            if (m.group(3), m.group(4)) != (start, end):
                return False
            modes.add(leg.mode)

        # meals
        for meal in _MEALS:
            text = getattr(e, meal)
            if text == "-":
                if not final:
                    return False
                continue
            key = _place(text)
            if key is None or key not in food or key[1] != city:
                return False
            meals_seen.append(text.strip())
            served |= food[key].cuisines

        # attractions
        for item in _items(e.attraction):
            key = _place(item)
            if key is None or key not in sights or key[1] != city:
                return False
            sights_seen.append(item)

        # lodging
        if final:
            if e.accommodation != "-":
                return False
        else:
            if e.accommodation == "-":
                return False
            key = _place(e.accommodation)
            if key is None or key not in hotels or key[1] != city:
                return False
            h = hotels[key]
            if query.required_room_type and h.room_type != query.required_room_type:
                return False
            if query.required_house_rule and "no_" + query.required_house_rule in h.house_rules:
                return False
            if stays and stays[-1][0] == e.accommodation:
                stays[-1] = (e.accommodation, stays[-1][1] + 1)
            else:
                stays.append((e.accommodation, 1))

    if here != query.origin or plan.entries[-1].current_city.strip() == query.origin:
        return False
    if _where(plan.entries[-1].current_city)[1] != query.origin:
        return False
    if stops != list(query.destinations):
        return False
    if len(set(meals_seen)) != len(meals_seen) or len(set(sights_seen)) != len(sights_seen):
        return False
    if "flight" in modes and "self-driving" in modes:
        return False
    if query.required_transport and query.required_transport[3:] in modes:
        return False
    if not query.required_cuisines <= served:
        return False
    for text, nights in stays:
        if nights < hotels[_place(text)].minimum_nights:
            return False
    return plan_cost(plan, db, query) <= query.budget


def _assemble(query: Query, out_leg, back_leg, nights, dest_meals, home_meals) -> Plan:
    n = query.n_days
    dest = query.destinations[0]
    entries = []
    slots = iter(dest_meals)
    for day in range(1, n + 1):
        fields = {"days": day}
        if day == 1:
            fields["current_city"] = render_route(query.origin, dest)
            fields["transportation"] = render_leg(out_leg.mode, out_leg.id, out_leg.from_city, out_leg.to_city)
        elif day == n:
            fields["current_city"] = render_route(dest, query.origin)
            fields["transportation"] = render_leg(back_leg.mode, back_leg.id, back_leg.from_city, back_leg.to_city)
        else:
            fields["current_city"] = dest
        if day < n:
            for meal in _MEALS:
                r = next(slots)
                fields[meal] = render_place(r.name, r.city)
            fields["accommodation"] = render_place(nights[day - 1].name, nights[day - 1].city)
        else:
            for meal, r in zip(_MEALS, home_meals):
                fields[meal] = render_place(r.name, r.city)
        entries.append(DayEntry(**fields))
    return Plan(tuple(entries))


def brute_force_oracle(db: ReferenceDatabase, query: Query, limits: OracleLimits = OracleLimits()) -> OracleResult:
    if len(query.destinations) != 1:
        raise OracleLimitError("the oracle handles single-destination queries only")
    n = query.n_days
    if n < 2:
        return OracleResult(False, None, None, 0)
    dest = query.destinations[0]
    people = query.n_people

    outs = [g for g in db.transport_legs if (g.from_city, g.to_city, g.day_available) == (query.origin, dest, 1)]
    backs = [g for g in db.transport_legs if (g.from_city, g.to_city, g.day_available) == (dest, query.origin, n)]
    local_hotels = [h for h in db.accommodations if h.city == dest]
    dest_food = sorted((r for r in db.restaurants if r.city == dest), key=lambda r: r.name)
    home_food = sorted((r for r in db.restaurants if r.city == query.origin), key=lambda r: r.name)
    n_nights, n_slots = n - 1, 3 * (n - 1)

    meal_count = math.comb(len(dest_food), n_slots) * sum(math.comb(len(home_food), k) for k in range(4))
    raw = len(outs) * len(backs) * len(local_hotels) ** n_nights * meal_count
    if raw > limits.max_combinations:
        raise OracleLimitError(f"{raw} combinations exceed the cap of {limits.max_combinations}")

    # each component is checked on its own; only the budget couples them
    transport = []
    for a, b in itertools.product(outs, backs):
        modes = {a.mode, b.mode}
        if {"flight", "self-driving"} <= modes:
            continue
        if query.required_transport and query.required_transport[3:] in modes:
            continue
        transport.append(((a.price_per_person + b.price_per_person) * people, a, b))

    lodging = []
    for seq in itertools.product(local_hotels, repeat=n_nights):
        if query.required_room_type and any(h.room_type != query.required_room_type for h in seq):
            continue
        if query.required_house_rule and any("no_" + query.required_house_rule in h.house_rules for h in seq):
            continue
        ok = True
        for _, group in itertools.groupby(seq):
            run = list(group)
            if len(run) < run[0].minimum_nights:
                ok = False
        if ok:
            lodging.append((sum(h.price_per_night * -(-people // h.max_occupancy) for h in seq), seq))

    dining = []
    for chosen in itertools.combinations(dest_food, n_slots):
        for k in range(4):
            for home in itertools.combinations(home_food, k):
                served = set().union(*(r.cuisines for r in chosen + home)) if chosen + home else set()
                if not query.required_cuisines <= served:
                    continue
                dining.append((sum(r.avg_cost_per_person for r in chosen + home) * people, chosen, home))

    best = None
    for t, s, d in itertools.product(transport, lodging, dining):
        total = t[0] + s[0] + d[0]
        if total <= query.budget and (best is None or total < best[0]):
            best = (total, t, s, d)
    if best is None:
        return OracleResult(False, None, None, raw)
    total, t, s, d = best
    witness = _assemble(query, t[1], t[2], s[1], d[1], d[2])
    if not plan_passes(witness, db, query):
        raise AssertionError("oracle assembled a witness its own checker rejects")
    return OracleResult(True, witness, total, raw)


# --------------------------------------------------------------------------
# random plans for agreement testing


def _random_skeleton(db: ReferenceDatabase, query: Query, rng: random.Random) -> Plan:
    n = query.n_days
    dest = query.destinations[0]
    home_food = [r for r in db.restaurants if r.city == query.origin]
    dest_food = [r for r in db.restaurants if r.city == dest]
    dest_hotels = [h for h in db.accommodations if h.city == dest]
    dest_sights = [a for a in db.attractions if a.city == dest]
    entries = []
    picked_food = rng.sample(dest_food, min(len(dest_food), 3 * (n - 1)))
    food = iter(picked_food)
    sights = iter(rng.sample(dest_sights, len(dest_sights)))
    hotel = rng.choice(dest_hotels) if dest_hotels else None
    for day in range(1, n + 1):
        fields = {"days": day}
        if day in (1, n):
            a, b = (query.origin, dest) if day == 1 else (dest, query.origin)
            fields["current_city"] = render_route(a, b)
            legs = [g for g in db.transport_legs if (g.from_city, g.to_city, g.day_available) == (a, b, day)]
            if rng.random() < 0.1 or not legs:
                legs = list(db.transport_legs)
            leg = rng.choice(legs)
            fields["transportation"] = render_leg(leg.mode, leg.id, leg.from_city, leg.to_city)
        else:
            fields["current_city"] = dest
        if day < n:
            for meal in _MEALS:
                r = next(food, None)
                fields[meal] = render_place(r.name, r.city) if r else "-"
            if dest_hotels and rng.random() < 0.4:
                hotel = rng.choice(dest_hotels)
            fields["accommodation"] = render_place(hotel.name, hotel.city) if hotel else "-"
            picks = [next(sights, None) for _ in range(rng.choice((0, 1, 1, 2)))]
            picks = [p for p in picks if p]
            fields["attraction"] = ";".join(render_place(p.name, p.city) for p in picks) or "-"
        else:
            for meal in _MEALS:
                if home_food and rng.random() < 0.3:
                    r = rng.choice(home_food)
                    fields[meal] = render_place(r.name, r.city)
        entries.append(DayEntry(**fields))
    return Plan(tuple(entries))


def _mutate(plan: Plan, db: ReferenceDatabase, query: Query, rng: random.Random) -> Plan:
    day = rng.randint(1, len(plan.entries))
    entry = plan.entries[day - 1]
    kind = rng.randrange(10)
    any_food = rng.choice(db.restaurants)
    any_hotel = rng.choice(db.accommodations)
    any_sight = rng.choice(db.attractions)
    any_leg = rng.choice(db.transport_legs)
    meal = rng.choice(_MEALS)
    if kind == 0:
        return plan.with_field(day, rng.choice(("transportation", "breakfast", "lunch", "dinner", "accommodation", "attraction")), "-")
    if kind == 1:
        return plan.with_field(day, meal, render_place(any_food.name, any_food.city))
    if kind == 2:
        return plan.with_field(day, "accommodation", render_place(any_hotel.name, any_hotel.city))
    if kind == 3:
        return plan.with_field(day, "transportation", render_leg(any_leg.mode, any_leg.id, any_leg.from_city, any_leg.to_city))
    if kind == 4:
        fake = rng.choice(("Phantom Diner", "Nowhere Inn", "Ghost Museum"))
        field_name = rng.choice(("breakfast", "attraction", "accommodation"))
        return plan.with_field(day, field_name, render_place(fake, query.destinations[0]))
    if kind == 5:
        # duplicate a restaurant used elsewhere
        used = [getattr(e, m) for e in plan.entries for m in _MEALS if getattr(e, m) != "-"]
        if used:
            return plan.with_field(day, meal, rng.choice(used))
        return plan
    if kind == 6:
        text = entry.attraction
        extra = render_place(any_sight.name, any_sight.city)
        return plan.with_field(day, "attraction", extra if text == "-" else f"{text};{extra}")
    if kind == 7:
        city = rng.choice(db.cities)
        other = rng.choice(db.cities)
        value = rng.choice((city, render_route(city, other), "-", render_route(query.origin, query.destinations[0])))
        return plan.with_field(day, "current_city", value)
    if kind == 8:
        # a leg whose text disagrees with the reference data
        return plan.with_field(day, "transportation", render_leg("taxi", any_leg.id, any_leg.from_city, any_leg.to_city))
    hotel = plan.entries[0].accommodation
    return plan.with_field(day, "accommodation", hotel)


def sample_plan(db: ReferenceDatabase, query: Query, rng: random.Random, witness: Optional[Plan] = None) -> Plan:
    """A random plan mixing near-feasible itineraries with targeted defects."""
    base = witness if witness is not None and rng.random() < 0.35 else _random_skeleton(db, query, rng)
    for _ in range(rng.choice((0, 0, 0, 1, 1, 2, 3))):
        base = _mutate(base, db, query, rng)
    return base
