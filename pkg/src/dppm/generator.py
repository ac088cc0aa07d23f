"""Seeded synthetic instances at desk scale.

``generate_instance`` is a pure function of ``(seed, size)``: every random
draw comes from one ``random.Random(seed)``, in a fixed order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .domain import (
    CUISINES,
    HOUSE_ACTIVITIES,
    HOUSE_RULES,
    ROOM_TYPES,
    Accommodation,
    Attraction,
    Query,
    ReferenceDatabase,
    Restaurant,
    TransportLeg,
)

CITY_POOL = (
    "Avalon", "Brindle", "Corvale", "Dunmore", "Eastwick", "Fairhaven",
    "Glenrock", "Harlow", "Ivydale", "Juniper",
)
_HOTEL_A = ("Cozy", "Sunny", "Quiet", "Grand", "Rustic", "Modern", "Charming", "Spacious")
_HOTEL_B = ("Loft", "Studio", "Cottage", "Suite", "Guesthouse", "Retreat", "Apartment", "Inn")
_FOOD_A = ("Golden", "Blue", "Little", "Red", "Olive", "Silver", "Copper", "Green", "Wild", "Lucky")
_FOOD_B = ("Spoon", "Door", "Kitchen", "Table", "Lantern", "Fork", "Garden", "Bistro", "Grill", "Pantry")
_SIGHTS = (
    "Old Mill", "City Museum", "River Walk", "Botanical Garden", "Clock Tower", "Art Gallery",
    "Harbor Pier", "Castle Ruins", "Science Center", "Sculpture Park",
)


@dataclass(frozen=True)
class SizeParams:
    n_cities: int = 3
    flights_per_pair: int = 2
    hotels_per_city: int = 3
    restaurants_per_city: int = 7
    attractions_per_city: int = 3
    n_days: int = 3

    def __post_init__(self) -> None:
        for name in ("n_cities", "flights_per_pair", "hotels_per_city", "restaurants_per_city", "attractions_per_city"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_cities < 2:
            raise ValueError("need at least an origin and a destination")
        if self.n_cities > len(CITY_POOL):
            raise ValueError(f"at most {len(CITY_POOL)} cities")
        if self.n_days < 2:
            raise ValueError("n_days must be >= 2")


def _unique_names(rng: random.Random, first: tuple[str, ...], second: tuple[str, ...], count: int) -> list[str]:
    pool = [f"{a} {b}" for a in first for b in second]
    return rng.sample(pool, count)


def generate_instance(seed: int, size: SizeParams = SizeParams()) -> tuple[ReferenceDatabase, Query]:
    rng = random.Random(seed)
    cities = tuple(rng.sample(CITY_POOL, size.n_cities))
    origin, destination = cities[0], cities[1]
    n_days = size.n_days

    legs: list[TransportLeg] = []
    serial = iter(range(1, 10_000))
    for a in cities:
        for b in cities:
            if a == b:
                continue
            if a == origin:
                day = 1
            elif b == origin:
                day = n_days
            else:
                day = rng.randint(1, n_days)
            for _ in range(size.flights_per_pair):
                legs.append(TransportLeg(f"F{rng.randint(1_000_000, 9_999_999)}{next(serial):03d}", "flight", a, b, rng.randint(60, 260), day))
            legs.append(TransportLeg(f"D{next(serial):04d}", "self-driving", a, b, rng.randint(40, 180), day))
            if rng.random() < 0.5:
                legs.append(TransportLeg(f"T{next(serial):04d}", "taxi", a, b, rng.randint(90, 320), day))

    hotels: list[Accommodation] = []
    restaurants: list[Restaurant] = []
    attractions: list[Attraction] = []
    for city in cities:
        prices = sorted(rng.randint(50, 240) for _ in range(size.hotels_per_city))
        for rank, (name, price) in enumerate(zip(_unique_names(rng, _HOTEL_A, _HOTEL_B, size.hotels_per_city), prices)):
            # cheap places tend to demand long stays
            if rank == 0:
                min_nights = rng.choices((1, 2, 3), weights=(0.3, 0.2, 0.5))[0]
            else:
                min_nights = rng.choices((1, 2, 3), weights=(0.6, 0.3, 0.1))[0]
            hotels.append(
                Accommodation(
                    name=name,
                    city=city,
                    price_per_night=price,
                    room_type=rng.choice(ROOM_TYPES),
                    house_rules=frozenset(r for r in HOUSE_RULES if rng.random() < 0.3),
                    minimum_nights=min_nights,
                    max_occupancy=rng.randint(1, 4),
                )
            )
        for name in _unique_names(rng, _FOOD_A, _FOOD_B, size.restaurants_per_city):
            restaurants.append(
                Restaurant(name, city, frozenset(rng.sample(CUISINES, rng.randint(1, 3))), rng.randint(10, 60))
            )
        for name in rng.sample(_SIGHTS, min(size.attractions_per_city, len(_SIGHTS))):
            attractions.append(Attraction(name, city))

    db = ReferenceDatabase(cities, tuple(legs), tuple(hotels), tuple(restaurants), tuple(attractions))
    query = _draw_query(rng, db, origin, destination, n_days)
    return db, query


def _draw_query(rng: random.Random, db: ReferenceDatabase, origin: str, destination: str, n_days: int) -> Query:
    n_people = rng.randint(1, 4)
    local_hotels = db.hotels_in(destination)
    local_food = db.restaurants_in(destination)

    # requirements are drawn from what the destination actually offers
    room_type = rng.choice(sorted({h.room_type for h in local_hotels})) if rng.random() < 0.3 else None
    house_rule = None
    if rng.random() < 0.3:
        allowed = [a for a in HOUSE_ACTIVITIES if any("no_" + a not in h.house_rules for h in local_hotels)]
        house_rule = rng.choice(allowed) if allowed else None
    cuisines: frozenset[str] = frozenset()
    if rng.random() < 0.4:
        offered = sorted(set().union(*(r.cuisines for r in local_food)))
        cuisines = frozenset(rng.sample(offered, min(len(offered), rng.randint(1, 2))))
    transport = rng.choice(("no flight", "no self-driving")) if rng.random() < 0.3 else None

    # optimistic estimate: cheapest item per slot, ignoring every rule but mode
    nights = n_days - 1
    out = [leg.price_per_person for leg in db.legs_between(origin, destination, 1)]
    back = [leg.price_per_person for leg in db.legs_between(destination, origin, n_days)]
    hotel = min(h.price_per_night * h.rooms_needed(n_people) for h in local_hotels)
    meals = sorted(r.avg_cost_per_person for r in local_food)[: 3 * nights]
    estimate = (min(out) + min(back)) * n_people + hotel * nights + sum(meals) * n_people
    budget = max(1, round(estimate * rng.uniform(0.95, 1.35)))
    return Query(
        origin=origin,
        destinations=(destination,),
        n_days=n_days,
        n_people=n_people,
        budget=budget,
        required_room_type=room_type,
        required_house_rule=house_rule,
        required_cuisines=cuisines,
        required_transport=transport,
    )
