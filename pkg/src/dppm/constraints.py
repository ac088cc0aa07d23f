"""The 13-rule constraint catalog and plan evaluation.

Rules are looked up by id from ``CATALOG``; the semantics of every rule live in
one ``_check_*`` function each, so the table can be swapped wholesale.

Rule selectors
--------------
Evaluation accepts a set of *selectors*.  A selector is either a bare rule id,
or ``"within_sandbox@<aspect>"`` which restricts the sandbox rule to the fields
of one aspect.  Several restricted sandbox selectors merge into one verdict.

Only entities that resolve in the database feed the content rules (budget,
room type, cuisine, ...); unresolvable text is reported by ``within_sandbox``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .domain import (
    ASPECT_FIELDS,
    ASPECTS,
    MEAL_FIELDS,
    PLACEHOLDER,
    Plan,
    Query,
    ReferenceDatabase,
    SubPlan,
    day_city,
    parse_leg,
    parse_place,
    parse_route,
    resolvable_cost,
    split_attractions,
    validate_structure,
)

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"

COMMONSENSE = "commonsense"
HARD = "hard"
GLOBAL = "global"
LOCAL = "local"

SANDBOX = "within_sandbox"
SCOPED_SEPARATOR = "@"


@dataclass(frozen=True)
class ConstraintRule:
    id: str
    cls: str
    scope: str
    aspects: tuple[str, ...]
    description: str


CATALOG: tuple[ConstraintRule, ...] = (
    ConstraintRule(SANDBOX, COMMONSENSE, LOCAL, ASPECTS, "every referenced entity exists in the reference data"),
    ConstraintRule("complete_information", COMMONSENSE, GLOBAL, (), "no required field is left as '-'"),
    ConstraintRule("within_current_city", COMMONSENSE, GLOBAL, (), "every entity is in the city of that day"),
    ConstraintRule("reasonable_city_route", COMMONSENSE, GLOBAL, (), "the route leaves the origin, visits the destinations, and returns"),
    ConstraintRule("diverse_restaurants", COMMONSENSE, LOCAL, ("meals",), "no restaurant is visited twice"),
    ConstraintRule("diverse_attractions", COMMONSENSE, LOCAL, ("attraction",), "no attraction is visited twice"),
    ConstraintRule("non_conflicting_transportation", COMMONSENSE, LOCAL, ("transportation",), "flights and self-driving never appear in the same plan"),
    ConstraintRule("minimum_nights_stay", COMMONSENSE, GLOBAL, (), "consecutive nights at a hotel meet its minimum stay"),
    ConstraintRule("budget", HARD, GLOBAL, (), "total cost does not exceed the budget"),
    ConstraintRule("room_rule", HARD, LOCAL, ("accommodation",), "hotels permit what the party needs"),
    ConstraintRule("room_type", HARD, LOCAL, ("accommodation",), "hotels offer the requested room type"),
    ConstraintRule("cuisine", HARD, LOCAL, ("meals",), "every requested cuisine is served at some meal"),
    ConstraintRule("transportation_preference", HARD, LOCAL, ("transportation",), "no transport of an excluded mode"),
)
RULES = {rule.id: rule for rule in CATALOG}
RULE_IDS = tuple(rule.id for rule in CATALOG)


@dataclass(frozen=True)
class RuleVerdict:
    rule: str
    status: str
    message: str = ""
    # (day, field) pairs naming offending slots; day 0 means plan-level
    locations: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        if self.status == FAIL and not self.message:
            raise ValueError(f"fail verdict for {self.rule} needs a message")

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "status": self.status,
            "message": self.message,
            "locations": [list(loc) for loc in self.locations],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RuleVerdict":
        return cls(data["rule"], data["status"], data["message"], tuple((d, f) for d, f in data["locations"]))


@dataclass(frozen=True)
class EvaluationReport:
    verdicts: tuple[RuleVerdict, ...]

    @property
    def pass_count(self) -> int:
        return sum(v.status == PASS for v in self.verdicts)

    @property
    def fail_count(self) -> int:
        return sum(v.status == FAIL for v in self.verdicts)

    @property
    def all_pass(self) -> bool:
        return self.fail_count == 0

    def failures(self) -> list[RuleVerdict]:
        return [v for v in self.verdicts if v.status == FAIL]

    def verdict(self, rule: str) -> Optional[RuleVerdict]:
        for v in self.verdicts:
            if v.rule == rule:
                return v
        return None

    def feedback(self) -> str:
        """Critic text: failing verdicts only, one line per offending item."""
        return "\n".join(v.message for v in self.failures())

    def to_dict(self) -> dict:
        return {"verdicts": [v.to_dict() for v in self.verdicts]}

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        return cls(tuple(RuleVerdict.from_dict(v) for v in data["verdicts"]))


def scoped(rule: str, aspect: str) -> str:
    return f"{rule}{SCOPED_SEPARATOR}{aspect}"


def selector_rule(selector: str) -> str:
    return selector.split(SCOPED_SEPARATOR, 1)[0]


def _line(rule: str, day: int, entity: str, reason: str) -> str:
    where = f"day {day}" if day else "plan"
    return f"[{rule}] {where}: {entity} — {reason}"


class _Findings:
    """Collects offending items for one rule in (day, field) order."""

    def __init__(self, rule: str) -> None:
        self.rule = rule
        self.items: list[tuple[int, int, str, str, str]] = []

    def add(self, day: int, field_name: str, entity: str, reason: str) -> None:
        order = _FIELD_ORDER.get(field_name, len(_FIELD_ORDER))
        self.items.append((day, order, field_name, entity, reason))

    def verdict(self) -> RuleVerdict:
        if not self.items:
            return RuleVerdict(self.rule, PASS)
        self.items.sort(key=lambda it: (it[0], it[1]))
        message = "\n".join(_line(self.rule, d, e, r) for d, _, _, e, r in self.items)
        locations = tuple(dict.fromkeys((d, f) for d, _, f, _, _ in self.items))
        return RuleVerdict(self.rule, FAIL, message, locations)


_FIELD_ORDER = {
    name: i
    for i, name in enumerate(
        ("current_city", "transportation", "breakfast", "attraction", "lunch", "dinner", "accommodation", "plan")
    )
}


# --------------------------------------------------------------------------
# rule checks


def _check_sandbox(plan: Plan, db: ReferenceDatabase, fields: set[str]) -> RuleVerdict:
    found = _Findings(SANDBOX)
    for e in plan.entries:
        if "transportation" in fields and e.transportation != PLACEHOLDER:
            parsed = parse_leg(e.transportation)
            if parsed is None:
                found.add(e.days, "transportation", e.transportation, "not a recognisable transport entry")
            else:
                mode, leg_id, a, b = parsed
                leg = db.leg(leg_id)
                if leg is None:
                    found.add(e.days, "transportation", leg_id, "no such transport in the reference data")
                elif (leg.mode, leg.from_city, leg.to_city) != (mode, a, b):
                    found.add(e.days, "transportation", leg_id, "details do not match the reference data")
                elif leg.day_available != e.days:
                    found.add(e.days, "transportation", leg_id, f"only available on day {leg.day_available}")
        for meal in MEAL_FIELDS:
            text = getattr(e, meal)
            if meal in fields and text != PLACEHOLDER:
                place = parse_place(text)
                if place is None or db.restaurant(*place) is None:
                    found.add(e.days, meal, text, "no such restaurant in the reference data")
        if "attraction" in fields:
            for item in split_attractions(e.attraction):
                place = parse_place(item)
                if place is None or db.attraction(*place) is None:
                    found.add(e.days, "attraction", item, "no such attraction in the reference data")
        if "accommodation" in fields and e.accommodation != PLACEHOLDER:
            place = parse_place(e.accommodation)
            if place is None or db.hotel(*place) is None:
                found.add(e.days, "accommodation", e.accommodation, "no such accommodation in the reference data")
    return found.verdict()


def _check_complete(plan: Plan, query: Query) -> RuleVerdict:
    found = _Findings("complete_information")
    last = len(plan.entries)
    for e in plan.entries:
        route = parse_route(e.current_city)
        if route is None:
            found.add(e.days, "current_city", e.current_city or "''", "current city is missing")
        elif route[1] is not None and e.transportation == PLACEHOLDER:
            found.add(e.days, "transportation", PLACEHOLDER, "travel day without transportation")
        if e.days < last:
            for meal in MEAL_FIELDS:
                if getattr(e, meal) == PLACEHOLDER:
                    found.add(e.days, meal, PLACEHOLDER, f"{meal} is missing")
            if e.accommodation == PLACEHOLDER:
                found.add(e.days, "accommodation", PLACEHOLDER, "accommodation is missing")
        elif e.accommodation != PLACEHOLDER:
            found.add(e.days, "accommodation", e.accommodation, "no accommodation is needed on the final day")
    return found.verdict()


def _check_current_city(plan: Plan) -> RuleVerdict:
    found = _Findings("within_current_city")
    for e in plan.entries:
        route = parse_route(e.current_city)
        city = day_city(e.current_city)
        if e.transportation != PLACEHOLDER:
            parsed = parse_leg(e.transportation)
            if route is None or route[1] is None:
                found.add(e.days, "transportation", e.transportation, "transport on a day without travel")
            elif parsed is not None and (parsed[2], parsed[3]) != route:
                found.add(e.days, "transportation", e.transportation, f"does not go {e.current_city}")
        named = [(meal, getattr(e, meal)) for meal in MEAL_FIELDS if getattr(e, meal) != PLACEHOLDER]
        named += [("attraction", item) for item in split_attractions(e.attraction)]
        if e.accommodation != PLACEHOLDER:
            named.append(("accommodation", e.accommodation))
        for field_name, text in named:
            place = parse_place(text)
            if place is None:
                continue
            if city is None:
                found.add(e.days, field_name, text, "the day has no current city")
            elif place[1] != city:
                found.add(e.days, field_name, text, f"is in {place[1]}, not in {city}")
    return found.verdict()


def _check_route(plan: Plan, query: Query, db: ReferenceDatabase) -> RuleVerdict:
    found = _Findings("reasonable_city_route")
    known = set(db.cities)
    location = query.origin
    visited: list[str] = []
    for e in plan.entries:
        route = parse_route(e.current_city)
        if route is None:
            found.add(e.days, "current_city", e.current_city or "''", "route is missing")
            continue
        start, end = route
        for city in (start, end):
            if city is not None and city not in known:
                found.add(e.days, "current_city", city, "unknown city")
        if start != location:
            found.add(e.days, "current_city", e.current_city, f"starts in {start} but the traveller is in {location}")
        if e.days == 1 and end is None:
            found.add(e.days, "current_city", e.current_city, f"the trip must leave {query.origin} on day 1")
        if end is not None:
            location = end
            if end != query.origin:
                visited.append(end)
    if plan.entries:
        last = plan.entries[-1]
        final = parse_route(last.current_city)
        if final is None or final[1] != query.origin:
            found.add(last.days, "current_city", last.current_city, f"the trip must return to {query.origin}")
    if visited != list(query.destinations):
        found.add(0, "plan", " -> ".join(visited) or "no destination", "visits " + ", ".join(query.destinations) + " are required in order")
    return found.verdict()


def _check_diverse(plan: Plan, rule: str, fields: tuple[str, ...]) -> RuleVerdict:
    found = _Findings(rule)
    seen: dict[str, int] = {}
    for e in plan.entries:
        for field_name in fields:
            text = getattr(e, field_name)
            items = split_attractions(text) if field_name == "attraction" else ([] if text == PLACEHOLDER else [text.strip()])
            for item in items:
                if item in seen:
                    found.add(e.days, field_name, item, f"already visited on day {seen[item]}")
                else:
                    seen[item] = e.days
    return found.verdict()


def _resolved_legs(plan: Plan, db: ReferenceDatabase):
    for e in plan.entries:
        if e.transportation == PLACEHOLDER:
            continue
        parsed = parse_leg(e.transportation)
        leg = db.leg(parsed[1]) if parsed else None
        if leg is not None:
            yield e.days, leg


def _resolved_hotels(plan: Plan, db: ReferenceDatabase):
    for e in plan.entries:
        if e.accommodation == PLACEHOLDER:
            continue
        place = parse_place(e.accommodation)
        hotel = db.hotel(*place) if place else None
        if hotel is not None:
            yield e.days, hotel


def _check_non_conflicting(plan: Plan, db: ReferenceDatabase) -> RuleVerdict:
    found = _Findings("non_conflicting_transportation")
    legs = list(_resolved_legs(plan, db))
    modes = {leg.mode for _, leg in legs}
    if {"flight", "self-driving"} <= modes:
        first = next(leg.mode for _, leg in legs if leg.mode in ("flight", "self-driving"))
        for day, leg in legs:
            if leg.mode in ("flight", "self-driving") and leg.mode != first:
                found.add(day, "transportation", leg.id, f"{leg.mode} conflicts with {first} elsewhere in the plan")
    return found.verdict()


def _check_min_nights(plan: Plan, db: ReferenceDatabase) -> RuleVerdict:
    found = _Findings("minimum_nights_stay")
    runs: list[list] = []
    for e in plan.entries:
        text = e.accommodation
        if runs and text != PLACEHOLDER and runs[-1][0] == text and runs[-1][2] == e.days - 1:
            runs[-1][2] = e.days
            runs[-1][3] += 1
        elif text != PLACEHOLDER:
            runs.append([text, e.days, e.days, 1])
    for text, start, _end, nights in runs:
        place = parse_place(text)
        hotel = db.hotel(*place) if place else None
        if hotel is not None and nights < hotel.minimum_nights:
            for day in range(start, start + nights):
                found.add(day, "accommodation", hotel.name, f"stay of {nights} night(s) is below the minimum of {hotel.minimum_nights}")
    return found.verdict()


def _check_budget(plan: Plan, query: Query, db: ReferenceDatabase) -> RuleVerdict:
    cost = resolvable_cost(plan, db, query)
    if cost <= query.budget:
        return RuleVerdict("budget", PASS)
    return RuleVerdict(
        "budget", FAIL, _line("budget", 0, f"total cost {cost}", f"exceeds the budget of {query.budget}"), ((0, "plan"),)
    )


def _check_room_rule(plan: Plan, query: Query, db: ReferenceDatabase) -> RuleVerdict:
    if not query.required_house_rule:
        return RuleVerdict("room_rule", NOT_APPLICABLE)
    found = _Findings("room_rule")
    banned = "no_" + query.required_house_rule
    for day, hotel in _resolved_hotels(plan, db):
        if banned in hotel.house_rules:
            found.add(day, "accommodation", hotel.name, f"does not allow {query.required_house_rule}")
    return found.verdict()


def _check_room_type(plan: Plan, query: Query, db: ReferenceDatabase) -> RuleVerdict:
    if not query.required_room_type:
        return RuleVerdict("room_type", NOT_APPLICABLE)
    found = _Findings("room_type")
    for day, hotel in _resolved_hotels(plan, db):
        if hotel.room_type != query.required_room_type:
            found.add(day, "accommodation", hotel.name, f"offers {hotel.room_type}, not {query.required_room_type}")
    return found.verdict()


def _check_cuisine(plan: Plan, query: Query, db: ReferenceDatabase) -> RuleVerdict:
    if not query.required_cuisines:
        return RuleVerdict("cuisine", NOT_APPLICABLE)
    served: set[str] = set()
    for e in plan.entries:
        for meal in MEAL_FIELDS:
            text = getattr(e, meal)
            place = parse_place(text) if text != PLACEHOLDER else None
            r = db.restaurant(*place) if place else None
            if r is not None:
                served |= r.cuisines
    missing = sorted(query.required_cuisines - served)
    if not missing:
        return RuleVerdict("cuisine", PASS)
    message = "\n".join(_line("cuisine", 0, c, "no chosen restaurant serves it") for c in missing)
    return RuleVerdict("cuisine", FAIL, message, ((0, "plan"),))


def _check_transport_preference(plan: Plan, query: Query, db: ReferenceDatabase) -> RuleVerdict:
    if not query.required_transport:
        return RuleVerdict("transportation_preference", NOT_APPLICABLE)
    banned = query.required_transport.removeprefix("no ")
    found = _Findings("transportation_preference")
    for day, leg in _resolved_legs(plan, db):
        if leg.mode == banned:
            found.add(day, "transportation", leg.id, f"the query asks for {query.required_transport}")
    return found.verdict()


# --------------------------------------------------------------------------
# entry points


def _sandbox_fields(selectors: set[str]) -> set[str]:
    fields: set[str] = set()
    for sel in selectors:
        rule, _, aspect = sel.partition(SCOPED_SEPARATOR)
        if rule != SANDBOX:
            continue
        aspects = (aspect,) if aspect else ASPECTS
        for a in aspects:
            fields.update(ASPECT_FIELDS[a])
    return fields


def evaluate_plan(
    plan: Plan,
    query: Query,
    db: ReferenceDatabase,
    rule_filter: Optional[Iterable[str]] = None,
) -> EvaluationReport:
    """Evaluate ``plan`` against the catalog (or the selected subset).

    Raises PlanStructureError if the plan's length or day indices are wrong.
    """
    validate_structure(plan.entries, query.n_days)
    selectors = set(RULE_IDS) if rule_filter is None else set(rule_filter)
    unknown = {selector_rule(s) for s in selectors} - set(RULE_IDS)
    if unknown:
        raise KeyError(f"unknown rules {sorted(unknown)}")
    chosen = {selector_rule(s) for s in selectors}
    checks = {
        SANDBOX: lambda: _check_sandbox(plan, db, _sandbox_fields(selectors)),
        "complete_information": lambda: _check_complete(plan, query),
        "within_current_city": lambda: _check_current_city(plan),
        "reasonable_city_route": lambda: _check_route(plan, query, db),
        "diverse_restaurants": lambda: _check_diverse(plan, "diverse_restaurants", MEAL_FIELDS),
        "diverse_attractions": lambda: _check_diverse(plan, "diverse_attractions", ("attraction",)),
        "non_conflicting_transportation": lambda: _check_non_conflicting(plan, db),
        "minimum_nights_stay": lambda: _check_min_nights(plan, db),
        "budget": lambda: _check_budget(plan, query, db),
        "room_rule": lambda: _check_room_rule(plan, query, db),
        "room_type": lambda: _check_room_type(plan, query, db),
        "cuisine": lambda: _check_cuisine(plan, query, db),
        "transportation_preference": lambda: _check_transport_preference(plan, query, db),
    }
    return EvaluationReport(tuple(checks[rule]() for rule in RULE_IDS if rule in chosen))


def local_selectors(aspect: str) -> frozenset[str]:
    """Selectors of the rules scoped to one aspect."""
    picked = {scoped(SANDBOX, aspect)}
    picked.update(r.id for r in CATALOG if r.scope == LOCAL and r.id != SANDBOX and aspect in r.aspects)
    return frozenset(picked)


def global_rule_ids() -> frozenset[str]:
    return frozenset(r.id for r in CATALOG if r.scope == GLOBAL)


def evaluate_subplan(sub: SubPlan, query: Query, db: ReferenceDatabase) -> EvaluationReport:
    """Local check of one subplan: only rules scoped to its aspect."""
    return evaluate_plan(sub.as_plan(), query, db, local_selectors(sub.aspect))


def applicable_rules(query: Query) -> list[str]:
    """Rule ids that yield a pass/fail verdict (not not_applicable) for ``query``."""
    skip = set()
    if not query.required_house_rule:
        skip.add("room_rule")
    if not query.required_room_type:
        skip.add("room_type")
    if not query.required_cuisines:
        skip.add("cuisine")
    if not query.required_transport:
        skip.add("transportation_preference")
    return [r for r in RULE_IDS if r not in skip]


def undelivered_report(query: Query, reason: str = "no plan was delivered") -> EvaluationReport:
    """Report for a sample without a plan: every applicable rule fails."""
    applicable = set(applicable_rules(query))
    return EvaluationReport(
        tuple(
            RuleVerdict(r, FAIL, _line(r, 0, "plan", reason)) if r in applicable else RuleVerdict(r, NOT_APPLICABLE)
            for r in RULE_IDS
        )
    )
