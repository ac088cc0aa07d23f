import copy
import json
from functools import lru_cache

import pytest

from dppm.domain import Plan, instance_from_dict
from dppm.generator import generate_instance
from dppm.oracle import brute_force_oracle

MINI = {
    "query": {
        "origin": "Ashford",
        "destinations": ["Bexley"],
        "n_days": 3,
        "n_people": 1,
        "budget": 700,
        "required_room_type": None,
        "required_house_rule": None,
        "required_cuisines": [],
        "required_transport": None,
    },
    "database": {
        "cities": ["Ashford", "Bexley"],
        "transport_legs": [
            {"id": "F100", "mode": "flight", "from": "Ashford", "to": "Bexley", "price_per_person": 120, "day_available": 1},
            {"id": "F200", "mode": "flight", "from": "Bexley", "to": "Ashford", "price_per_person": 110, "day_available": 3},
            {"id": "D0001", "mode": "self-driving", "from": "Ashford", "to": "Bexley", "price_per_person": 60, "day_available": 1},
            {"id": "D0002", "mode": "self-driving", "from": "Bexley", "to": "Ashford", "price_per_person": 60, "day_available": 3},
        ],
        "accommodations": [
            {"name": "Harbor Inn", "city": "Bexley", "price_per_night": 80, "room_type": "entire_room",
             "house_rules": ["no_pets"], "minimum_nights": 1, "max_occupancy": 2},
            {"name": "Tiny Loft", "city": "Bexley", "price_per_night": 50, "room_type": "private_room",
             "house_rules": [], "minimum_nights": 3, "max_occupancy": 1},
        ],
        "restaurants": [
            {"name": f"Cafe {i}", "city": "Bexley", "cuisines": [c], "avg_cost_per_person": 15}
            for i, c in enumerate(["italian", "chinese", "mexican", "indian", "french", "american"], start=1)
        ]
        + [{"name": "Home Diner", "city": "Ashford", "cuisines": ["american"], "avg_cost_per_person": 20}],
        "attractions": [{"name": "Old Mill", "city": "Bexley"}, {"name": "City Museum", "city": "Bexley"}],
    },
}

GOOD_PLAN = {
    "plan": [
        {"days": 1, "current_city": "from Ashford to Bexley", "transportation": "Flight Number: F100, from Ashford to Bexley",
         "breakfast": "Cafe 1, Bexley", "attraction": "Old Mill, Bexley", "lunch": "Cafe 2, Bexley",
         "dinner": "Cafe 3, Bexley", "accommodation": "Harbor Inn, Bexley"},
        {"days": 2, "current_city": "Bexley", "transportation": "-",
         "breakfast": "Cafe 4, Bexley", "attraction": "City Museum, Bexley", "lunch": "Cafe 5, Bexley",
         "dinner": "Cafe 6, Bexley", "accommodation": "Harbor Inn, Bexley"},
        {"days": 3, "current_city": "from Bexley to Ashford", "transportation": "Flight Number: F200, from Bexley to Ashford",
         "breakfast": "-", "attraction": "-", "lunch": "-", "dinner": "-", "accommodation": "-"},
    ]
}


def mini_doc(**query_changes):
    doc = copy.deepcopy(MINI)
    doc["query"].update(query_changes)
    return doc


def mini(**query_changes):
    return instance_from_dict(mini_doc(**query_changes))


def good_plan() -> Plan:
    return Plan.from_dict(copy.deepcopy(GOOD_PLAN))


@lru_cache(maxsize=None)
def seeded(seed: int):
    return generate_instance(seed)


@lru_cache(maxsize=None)
def oracle_for(seed: int):
    db, query = seeded(seed)
    return brute_force_oracle(db, query)


@lru_cache(maxsize=None)
def first_feasible_seed() -> int:
    return next(s for s in range(100) if oracle_for(s).feasible)


@pytest.fixture
def mini_instance():
    return mini()


@pytest.fixture
def mini_json():
    return json.dumps(MINI)


def aspect_reply(aspect: str, *plans: Plan, prose: str = "") -> str:
    """A chat reply carrying local candidates for ``aspect`` in the wire format."""
    from dppm.domain import SubPlan

    subs = [SubPlan.from_dict(aspect, {"plan_id": i, **p.to_dict()}).to_dict() for i, p in enumerate(plans, start=1)]
    body = json.dumps(subs)
    return f"{prose}\n{body}\nHope this helps." if prose else body
