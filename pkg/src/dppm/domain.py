"""Itinerary data model, instance file format and plan cost.

An instance is a reference database (transport legs, hotels, restaurants,
attractions) plus one query.  Plans reference database entities through
rendered text, the same way a language model would write them:

    transportation  "Flight Number: F0000001, from Avalon to Brindle"
    breakfast       "Blue Door Cafe, Brindle"
    attraction      "Old Mill, Brindle;City Museum, Brindle"
    accommodation   "Harbor Loft, Brindle"

The placeholder "-" marks an absent field.  Currency is integer units.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Iterator, Optional

PLACEHOLDER = "-"

MODES = ("flight", "self-driving", "taxi")
ROOM_TYPES = ("entire_room", "private_room", "shared_room")
HOUSE_RULES = ("no_parties", "no_smoking", "no_children", "no_pets", "no_visitors")
# activities a party may need permitted; "pets" is blocked by "no_pets", etc.
HOUSE_ACTIVITIES = tuple(rule[3:] for rule in HOUSE_RULES)
CUISINES = ("american", "chinese", "italian", "mexican", "indian", "mediterranean", "french")
TRANSPORT_RESTRICTIONS = ("no flight", "no self-driving")

ASPECTS = ("transportation", "accommodation", "attraction", "meals")
MERGE_ORDER = ("transportation", "attraction", "accommodation", "meals")
MEAL_FIELDS = ("breakfast", "lunch", "dinner")
ASPECT_FIELDS = {
    "transportation": ("transportation",),
    "accommodation": ("accommodation",),
    "attraction": ("attraction",),
    "meals": MEAL_FIELDS,
}
ENTRY_FIELDS = (
    "days",
    "current_city",
    "transportation",
    "breakfast",
    "attraction",
    "lunch",
    "dinner",
    "accommodation",
)
CONTENT_FIELDS = ENTRY_FIELDS[2:]

_MODE_LABELS = {"flight": "Flight Number", "self-driving": "Self-driving", "taxi": "Taxi"}
_LABEL_MODES = {label: mode for mode, label in _MODE_LABELS.items()}
_LEG_RE = re.compile(r"^(Flight Number|Self-driving|Taxi): (\S+), from (.+) to (.+)$")
_ROUTE_RE = re.compile(r"^from (.+) to (.+)$")
_FLIGHT_ID_RE = re.compile(r"^F\d+$")


class InstanceError(ValueError):
    """Base class for instance-file problems."""


class InstanceParseError(InstanceError):
    pass


class InstanceValidationError(InstanceError):
    pass


class PlanStructureError(ValueError):
    """Plan length or day indices do not match the query."""


class UnresolvedReference(LookupError):
    pass


# --------------------------------------------------------------------------
# database entities


@dataclass(frozen=True)
class TransportLeg:
    id: str
    mode: str
    from_city: str
    to_city: str
    price_per_person: int
    day_available: int

    def render(self) -> str:
        return render_leg(self.mode, self.id, self.from_city, self.to_city)


@dataclass(frozen=True)
class Accommodation:
    name: str
    city: str
    price_per_night: int
    room_type: str
    house_rules: frozenset[str]
    minimum_nights: int
    max_occupancy: int

    def render(self) -> str:
        return render_place(self.name, self.city)

    def rooms_needed(self, n_people: int) -> int:
        return math.ceil(n_people / self.max_occupancy)


@dataclass(frozen=True)
class Restaurant:
    name: str
    city: str
    cuisines: frozenset[str]
    avg_cost_per_person: int

    def render(self) -> str:
        return render_place(self.name, self.city)


@dataclass(frozen=True)
class Attraction:
    name: str
    city: str

    def render(self) -> str:
        return render_place(self.name, self.city)


@dataclass(frozen=True)
class ReferenceDatabase:
    cities: tuple[str, ...]
    transport_legs: tuple[TransportLeg, ...]
    accommodations: tuple[Accommodation, ...]
    restaurants: tuple[Restaurant, ...]
    attractions: tuple[Attraction, ...]
    _legs: dict = field(init=False, repr=False, compare=False)
    _hotels: dict = field(init=False, repr=False, compare=False)
    _restaurants: dict = field(init=False, repr=False, compare=False)
    _attractions: dict = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_legs", {leg.id: leg for leg in self.transport_legs})
        object.__setattr__(self, "_hotels", {(h.name, h.city): h for h in self.accommodations})
        object.__setattr__(self, "_restaurants", {(r.name, r.city): r for r in self.restaurants})
        object.__setattr__(self, "_attractions", {(a.name, a.city): a for a in self.attractions})
        object.__setattr__(
            self,
            "_hash",
            hash((self.cities, self.transport_legs, self.accommodations, self.restaurants, self.attractions)),
        )

    def __hash__(self) -> int:
        return self._hash

    def leg(self, leg_id: str) -> Optional[TransportLeg]:
        return self._legs.get(leg_id)

    def hotel(self, name: str, city: str) -> Optional[Accommodation]:
        return self._hotels.get((name, city))

    def restaurant(self, name: str, city: str) -> Optional[Restaurant]:
        return self._restaurants.get((name, city))

    def attraction(self, name: str, city: str) -> Optional[Attraction]:
        return self._attractions.get((name, city))

    def legs_between(self, a: str, b: str, day: int) -> list[TransportLeg]:
        return [leg for leg in self.transport_legs if leg.from_city == a and leg.to_city == b and leg.day_available == day]

    def hotels_in(self, city: str) -> list[Accommodation]:
        return [h for h in self.accommodations if h.city == city]

    def restaurants_in(self, city: str) -> list[Restaurant]:
        return [r for r in self.restaurants if r.city == city]

    def attractions_in(self, city: str) -> list[Attraction]:
        return [a for a in self.attractions if a.city == city]


@dataclass(frozen=True)
class Query:
    origin: str
    destinations: tuple[str, ...]
    n_days: int
    n_people: int
    budget: int
    required_room_type: Optional[str] = None
    required_house_rule: Optional[str] = None
    required_cuisines: frozenset[str] = frozenset()
    required_transport: Optional[str] = None

    def describe(self) -> str:
        """Natural-language rendering handed to planners."""
        route = " and ".join(self.destinations)
        people = "1 person" if self.n_people == 1 else f"{self.n_people} people"
        text = (
            f"Could you create a travel plan for {people} from {self.origin} to {route} "
            f"spanning {self.n_days} days, with a budget of ${self.budget}?"
        )
        wishes = []
        if self.required_room_type:
            wishes.append(f"the room type must be {self.required_room_type.replace('_', ' ')}")
        if self.required_house_rule:
            wishes.append(f"the accommodation must allow {self.required_house_rule}")
        if self.required_cuisines:
            wishes.append("we want to try " + ", ".join(sorted(self.required_cuisines)) + " cuisine")
        if self.required_transport:
            wishes.append(f"please use {self.required_transport} transportation")
        if wishes:
            text += " Requirements: " + "; ".join(wishes) + "."
        return text


# --------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class DayEntry:
    days: int
    current_city: str = PLACEHOLDER
    transportation: str = PLACEHOLDER
    breakfast: str = PLACEHOLDER
    attraction: str = PLACEHOLDER
    lunch: str = PLACEHOLDER
    dinner: str = PLACEHOLDER
    accommodation: str = PLACEHOLDER

    def to_dict(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in ENTRY_FIELDS}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DayEntry":
        unknown = set(data) - set(ENTRY_FIELDS)
        if unknown:
            raise ValueError(f"unknown day-entry fields: {sorted(unknown)}")
        if "days" not in data:
            raise ValueError("day entry lacks 'days'")
        values = {}
        for name in ENTRY_FIELDS[1:]:
            value = data.get(name, PLACEHOLDER)
            if not isinstance(value, str):
                raise ValueError(f"field {name!r} must be a string")
            values[name] = value
        days = data["days"]
        if isinstance(days, bool) or not isinstance(days, int):
            raise ValueError("'days' must be an integer")
        return cls(days=days, **values)


@dataclass(frozen=True)
class Plan:
    entries: tuple[DayEntry, ...]

    @classmethod
    def blank(cls, n_days: int) -> "Plan":
        return cls(tuple(DayEntry(days=d) for d in range(1, n_days + 1)))

    @classmethod
    def skeleton(cls, query: "Query") -> "Plan":
        """Empty plan that already carries the canonical route."""
        return cls(tuple(DayEntry(days=d, current_city=c) for d, c in enumerate(route_skeleton(query), start=1)))

    def to_dict(self) -> dict[str, Any]:
        return {"plan": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: Any) -> "Plan":
        if not isinstance(data, dict) or not isinstance(data.get("plan"), list):
            raise ValueError('plan document must be an object with a "plan" list')
        return cls(tuple(DayEntry.from_dict(e) for e in data["plan"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    def with_field(self, day: int, name: str, value: str) -> "Plan":
        entries = list(self.entries)
        entries[day - 1] = replace(entries[day - 1], **{name: value})
        return Plan(tuple(entries))

    def aspect_present(self, aspect: str) -> bool:
        return any(getattr(e, f) != PLACEHOLDER for e in self.entries for f in ASPECT_FIELDS[aspect])


@dataclass(frozen=True)
class SubPlan:
    aspect: str
    plan_id: int
    description: str
    entries: tuple[DayEntry, ...]

    def __post_init__(self) -> None:
        if self.aspect not in ASPECTS:
            raise ValueError(f"unknown aspect {self.aspect!r}")
        allowed = set(ASPECT_FIELDS[self.aspect])
        for entry in self.entries:
            for name in CONTENT_FIELDS:
                if name not in allowed and getattr(entry, name) != PLACEHOLDER:
                    raise ValueError(f"{self.aspect} subplan sets non-aspect field {name!r} on day {entry.days}")

    def as_plan(self) -> Plan:
        return Plan(self.entries)

    def to_dict(self) -> dict[str, Any]:
        # the local-plan wire format: only days, current_city and the aspect fields
        keep = ("days", "current_city") + ASPECT_FIELDS[self.aspect]
        return {
            "plan_id": self.plan_id,
            "description": self.description,
            "plan": [{k: getattr(e, k) for k in keep} for e in self.entries],
        }

    @classmethod
    def from_dict(cls, aspect: str, data: dict[str, Any]) -> "SubPlan":
        entries = []
        for raw in data["plan"]:
            picked = {k: raw[k] for k in ("days", "current_city") + ASPECT_FIELDS[aspect] if k in raw}
            entries.append(DayEntry.from_dict(picked))
        return cls(aspect, int(data["plan_id"]), str(data.get("description", "")), tuple(entries))

    def with_entries(self, entries: Iterable[DayEntry]) -> "SubPlan":
        return replace(self, entries=tuple(entries))


def validate_structure(entries: tuple[DayEntry, ...], n_days: int) -> None:
    if len(entries) != n_days:
        raise PlanStructureError(f"plan has {len(entries)} days, query asks for {n_days}")
    for expected, entry in enumerate(entries, start=1):
        if entry.days != expected:
            raise PlanStructureError(f"day index {entry.days} found where {expected} expected")


def is_structurally_complete(plan: Optional[Plan], n_days: int) -> bool:
    if plan is None:
        return False
    try:
        validate_structure(plan.entries, n_days)
    except PlanStructureError:
        return False
    return True


# --------------------------------------------------------------------------
# rendering and parsing of field text


def render_leg(mode: str, leg_id: str, a: str, b: str) -> str:
    return f"{_MODE_LABELS[mode]}: {leg_id}, from {a} to {b}"


def parse_leg(text: str) -> Optional[tuple[str, str, str, str]]:
    """Return (mode, id, from, to) or None when the text is not a leg."""
    m = _LEG_RE.match(text.strip())
    if not m:
        return None
    return _LABEL_MODES[m.group(1)], m.group(2), m.group(3), m.group(4)


def render_place(name: str, city: str) -> str:
    return f"{name}, {city}"


def parse_place(text: str) -> Optional[tuple[str, str]]:
    name, sep, city = text.strip().rpartition(", ")
    if not sep or not name or not city:
        return None
    return name, city


def split_attractions(text: str) -> list[str]:
    if text.strip() == PLACEHOLDER:
        return []
    return [part.strip() for part in text.split(";") if part.strip()]


def render_route(a: str, b: Optional[str] = None) -> str:
    return a if b is None else f"from {a} to {b}"


def parse_route(text: str) -> Optional[tuple[str, Optional[str]]]:
    """("A", None) for a stay, ("A", "B") for a transition; None if unreadable."""
    text = text.strip()
    if not text or text == PLACEHOLDER:
        return None
    m = _ROUTE_RE.match(text)
    if m:
        return m.group(1), m.group(2)
    return text, None


def day_city(current_city: str) -> Optional[str]:
    """City where the day's activities happen: destination side of a transition."""
    route = parse_route(current_city)
    if route is None:
        return None
    return route[1] if route[1] is not None else route[0]


def route_skeleton(query: Query) -> tuple[str, ...]:
    """Canonical current_city values: leave on day 1, split the remaining
    nights evenly over the destinations, return on the final day."""
    stops = list(query.destinations)
    nights = query.n_days - 1
    if nights < len(stops):
        raise ValueError("not enough days to visit every destination")
    base, extra = divmod(nights, len(stops))
    stays = [base + (1 if i < extra else 0) for i in range(len(stops))]
    days: list[str] = []
    previous = query.origin
    for stop, length in zip(stops, stays):
        days.append(render_route(previous, stop))
        days.extend([stop] * (length - 1))
        previous = stop
    days.append(render_route(previous, query.origin))
    return tuple(days)


# --------------------------------------------------------------------------
# cost


def iter_priced_items(plan: Plan, db: ReferenceDatabase, query: Query, strict: bool) -> Iterator[int]:
    for entry in plan.entries:
        if entry.transportation != PLACEHOLDER:
            parsed = parse_leg(entry.transportation)
            leg = db.leg(parsed[1]) if parsed else None
            if leg is None:
                if strict:
                    raise UnresolvedReference(f"day {entry.days}: transport {entry.transportation!r}")
            else:
                yield leg.price_per_person * query.n_people
        for meal in MEAL_FIELDS:
            text = getattr(entry, meal)
            if text == PLACEHOLDER:
                continue
            place = parse_place(text)
            r = db.restaurant(*place) if place else None
            if r is None:
                if strict:
                    raise UnresolvedReference(f"day {entry.days}: {meal} {text!r}")
            else:
                yield r.avg_cost_per_person * query.n_people
        if entry.accommodation != PLACEHOLDER:
            place = parse_place(entry.accommodation)
            h = db.hotel(*place) if place else None
            if h is None:
                if strict:
                    raise UnresolvedReference(f"day {entry.days}: accommodation {entry.accommodation!r}")
            else:
                yield h.price_per_night * h.rooms_needed(query.n_people)
        if strict:
            for item in split_attractions(entry.attraction):
                place = parse_place(item)
                if place is None or db.attraction(*place) is None:
                    raise UnresolvedReference(f"day {entry.days}: attraction {item!r}")


def total_cost(plan: Plan, db: ReferenceDatabase, query: Query) -> int:
    """Total trip cost.  Raises UnresolvedReference on unknown entities."""
    return sum(iter_priced_items(plan, db, query, strict=True))


def resolvable_cost(plan: Plan, db: ReferenceDatabase, query: Query) -> int:
    """Cost of the items that resolve; a lower bound for partial plans."""
    return sum(iter_priced_items(plan, db, query, strict=False))


# --------------------------------------------------------------------------
# instance files

_QUERY_KEYS = {
    "origin",
    "destinations",
    "n_days",
    "n_people",
    "budget",
    "required_room_type",
    "required_house_rule",
    "required_cuisines",
    "required_transport",
}
_LEG_KEYS = {"id", "mode", "from", "to", "price_per_person", "day_available"}
_HOTEL_KEYS = {"name", "city", "price_per_night", "room_type", "house_rules", "minimum_nights", "max_occupancy"}
_RESTAURANT_KEYS = {"name", "city", "cuisines", "avg_cost_per_person"}
_ATTRACTION_KEYS = {"name", "city"}
_DB_KEYS = {"cities", "transport_legs", "accommodations", "restaurants", "attractions"}


def _check_keys(where: str, data: Any, allowed: set[str], required: Optional[set[str]] = None) -> None:
    if not isinstance(data, dict):
        raise InstanceParseError(f"{where}: expected an object")
    unknown = set(data) - allowed
    if unknown:
        raise InstanceParseError(f"{where}: unknown fields {sorted(unknown)}")
    missing = (allowed if required is None else required) - set(data)
    if missing:
        raise InstanceParseError(f"{where}: missing fields {sorted(missing)}")


def _int(where: str, value: Any, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceParseError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise InstanceValidationError(f"{where}: {value} is below the minimum {minimum}")
    return value


def _str(where: str, value: Any) -> str:
    if not isinstance(value, str) or not value:
        raise InstanceParseError(f"{where}: expected a nonempty string")
    return value


def _enum(where: str, value: Any, allowed: Iterable[str]) -> str:
    value = _str(where, value)
    if value not in allowed:
        raise InstanceValidationError(f"{where}: {value!r} is not one of {sorted(allowed)}")
    return value


def _city(where: str, value: Any, cities: set[str]) -> str:
    value = _str(where, value)
    if value not in cities:
        raise InstanceValidationError(f"{where}: dangling city reference {value!r}")
    return value


def instance_from_dict(data: Any) -> tuple[ReferenceDatabase, Query]:
    _check_keys("instance", data, {"query", "database"})
    raw_db = data["database"]
    _check_keys("database", raw_db, _DB_KEYS)
    if not isinstance(raw_db["cities"], list):
        raise InstanceParseError("database.cities: expected a list")
    cities = tuple(_str("database.cities", c) for c in raw_db["cities"])
    if len(set(cities)) != len(cities):
        raise InstanceValidationError("database.cities: duplicate city names")
    city_set = set(cities)

    def rows(key: str) -> list:
        value = raw_db[key]
        if not isinstance(value, list):
            raise InstanceParseError(f"database.{key}: expected a list")
        return value

    legs = []
    for i, raw in enumerate(rows("transport_legs")):
        where = f"transport_legs[{i}]"
        _check_keys(where, raw, _LEG_KEYS)
        mode = _enum(where + ".mode", raw["mode"], MODES)
        leg_id = _str(where + ".id", raw["id"])
        if mode == "flight" and not _FLIGHT_ID_RE.match(leg_id):
            raise InstanceValidationError(f"{where}.id: flight id {leg_id!r} must be F followed by digits")
        a = _city(where + ".from", raw["from"], city_set)
        b = _city(where + ".to", raw["to"], city_set)
        if a == b:
            raise InstanceValidationError(f"{where}: leg starts and ends in {a!r}")
        legs.append(
            TransportLeg(
                leg_id, mode, a, b, _int(where + ".price_per_person", raw["price_per_person"], 0),
                _int(where + ".day_available", raw["day_available"], 1),
            )
        )
    if len({leg.id for leg in legs}) != len(legs):
        raise InstanceValidationError("transport_legs: duplicate leg ids")

    hotels = []
    for i, raw in enumerate(rows("accommodations")):
        where = f"accommodations[{i}]"
        _check_keys(where, raw, _HOTEL_KEYS)
        if not isinstance(raw["house_rules"], list):
            raise InstanceParseError(f"{where}.house_rules: expected a list")
        hotels.append(
            Accommodation(
                _str(where + ".name", raw["name"]),
                _city(where + ".city", raw["city"], city_set),
                _int(where + ".price_per_night", raw["price_per_night"], 0),
                _enum(where + ".room_type", raw["room_type"], ROOM_TYPES),
                frozenset(_enum(where + ".house_rules", r, HOUSE_RULES) for r in raw["house_rules"]),
                _int(where + ".minimum_nights", raw["minimum_nights"], 1),
                _int(where + ".max_occupancy", raw["max_occupancy"], 1),
            )
        )

    restaurants = []
    for i, raw in enumerate(rows("restaurants")):
        where = f"restaurants[{i}]"
        _check_keys(where, raw, _RESTAURANT_KEYS)
        if not isinstance(raw["cuisines"], list) or not raw["cuisines"]:
            raise InstanceValidationError(f"{where}.cuisines: expected a nonempty list")
        restaurants.append(
            Restaurant(
                _str(where + ".name", raw["name"]),
                _city(where + ".city", raw["city"], city_set),
                frozenset(_enum(where + ".cuisines", c, CUISINES) for c in raw["cuisines"]),
                _int(where + ".avg_cost_per_person", raw["avg_cost_per_person"], 0),
            )
        )

    attractions = []
    for i, raw in enumerate(rows("attractions")):
        where = f"attractions[{i}]"
        _check_keys(where, raw, _ATTRACTION_KEYS)
        attractions.append(Attraction(_str(where + ".name", raw["name"]), _city(where + ".city", raw["city"], city_set)))

    for label, items in (("accommodations", hotels), ("restaurants", restaurants), ("attractions", attractions)):
        keys = [(x.name, x.city) for x in items]
        if len(set(keys)) != len(keys):
            raise InstanceValidationError(f"{label}: duplicate (name, city) entries")

    raw_q = data["query"]
    _check_keys("query", raw_q, _QUERY_KEYS, required={"origin", "destinations", "n_days", "n_people", "budget"})
    if not isinstance(raw_q["destinations"], list) or not raw_q["destinations"]:
        raise InstanceValidationError("query.destinations: expected a nonempty list")
    cuisines = raw_q.get("required_cuisines") or []
    if not isinstance(cuisines, list):
        raise InstanceParseError("query.required_cuisines: expected a list")

    def optional(key: str, allowed: Iterable[str]) -> Optional[str]:
        value = raw_q.get(key)
        return None if value is None else _enum(f"query.{key}", value, allowed)

    query = Query(
        origin=_city("query.origin", raw_q["origin"], city_set),
        destinations=tuple(_city("query.destinations", c, city_set) for c in raw_q["destinations"]),
        n_days=_int("query.n_days", raw_q["n_days"], 1),
        n_people=_int("query.n_people", raw_q["n_people"], 1),
        budget=_int("query.budget", raw_q["budget"], 0),
        required_room_type=optional("required_room_type", ROOM_TYPES),
        required_house_rule=optional("required_house_rule", HOUSE_ACTIVITIES),
        required_cuisines=frozenset(_enum("query.required_cuisines", c, CUISINES) for c in cuisines),
        required_transport=optional("required_transport", TRANSPORT_RESTRICTIONS),
    )
    db = ReferenceDatabase(cities, tuple(legs), tuple(hotels), tuple(restaurants), tuple(attractions))
    return db, query


def instance_to_dict(db: ReferenceDatabase, query: Query) -> dict[str, Any]:
    return {
        "query": {
            "origin": query.origin,
            "destinations": list(query.destinations),
            "n_days": query.n_days,
            "n_people": query.n_people,
            "budget": query.budget,
            "required_room_type": query.required_room_type,
            "required_house_rule": query.required_house_rule,
            "required_cuisines": sorted(query.required_cuisines),
            "required_transport": query.required_transport,
        },
        "database": {
            "cities": list(db.cities),
            "transport_legs": [
                {
                    "id": leg.id,
                    "mode": leg.mode,
                    "from": leg.from_city,
                    "to": leg.to_city,
                    "price_per_person": leg.price_per_person,
                    "day_available": leg.day_available,
                }
                for leg in db.transport_legs
            ],
            "accommodations": [
                {
                    "name": h.name,
                    "city": h.city,
                    "price_per_night": h.price_per_night,
                    "room_type": h.room_type,
                    "house_rules": sorted(h.house_rules),
                    "minimum_nights": h.minimum_nights,
                    "max_occupancy": h.max_occupancy,
                }
                for h in db.accommodations
            ],
            "restaurants": [
                {
                    "name": r.name,
                    "city": r.city,
                    "cuisines": sorted(r.cuisines),
                    "avg_cost_per_person": r.avg_cost_per_person,
                }
                for r in db.restaurants
            ],
            "attractions": [{"name": a.name, "city": a.city} for a in db.attractions],
        },
    }


def load_instance(document: str) -> tuple[ReferenceDatabase, Query]:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"malformed instance document: {exc}") from exc
    return instance_from_dict(data)


def dump_instance(db: ReferenceDatabase, query: Query) -> str:
    return json.dumps(instance_to_dict(db, query), indent=2) + "\n"


def load_plan(document: str) -> Plan:
    return Plan.from_dict(json.loads(document))
