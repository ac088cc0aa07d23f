import itertools
from concurrent.futures import ThreadPoolExecutor

import pytest
from conftest import mini, mini_doc, seeded

from dppm.backends.base import BackendConfig, NoCandidates, RefineContext, make_backend
from dppm.backends.exhaustive import ExhaustiveBackend
from dppm.backends.faulty import FaultyBackend
from dppm.backends.greedy import GreedyBackend
from dppm.constraints import evaluate_plan, evaluate_subplan, local_selectors
from dppm.decompose import DecomposeConfig, build_subtasks, partition_constraints
from dppm.domain import ASPECT_FIELDS, ASPECTS, PLACEHOLDER, instance_from_dict, resolvable_cost, validate_structure
from dppm.refine import refine_loop

DETERMINISTIC = [ExhaustiveBackend, GreedyBackend, lambda: FaultyBackend(0.3, 0)]


def subtasks(instance, **cfg):
    _, query = instance
    return build_subtasks(query, partition_constraints(query), DecomposeConfig(**cfg))


@pytest.mark.parametrize("factory", DETERMINISTIC, ids=["exhaustive", "greedy", "faulty"])
@pytest.mark.parametrize("seed", [0, 2, 5])
def test_local_candidates_are_well_formed(factory, seed):
    db, query = seeded(seed)
    backend = factory()
    for sub in subtasks((db, query)):
        cands = backend.generate_local(sub, db)
        assert 1 <= len(cands) <= 3
        assert len({c.plan_id for c in cands}) == len(cands)
        for c in cands:
            assert c.aspect == sub.aspect
            validate_structure(c.entries, query.n_days)
        assert backend.generate_local(sub, db) == cands


@pytest.mark.parametrize("factory", DETERMINISTIC, ids=["exhaustive", "greedy", "faulty"])
def test_parallel_calls_agree(factory):
    db, query = seeded(4)
    backend = factory()
    sub = subtasks((db, query))[3]
    with ThreadPoolExecutor(8) as pool:
        results = list(pool.map(lambda _: backend.generate_local(sub, db), range(8)))
    assert all(r == results[0] for r in results)


@pytest.mark.parametrize("factory", DETERMINISTIC, ids=["exhaustive", "greedy", "faulty"])
def test_direct_plan_is_structurally_valid(factory):
    db, query = seeded(6)
    plan = factory().generate_plan(query, db)
    validate_structure(plan.entries, query.n_days)


def test_make_backend_kinds():
    assert isinstance(make_backend(BackendConfig("exhaustive")), ExhaustiveBackend)
    assert isinstance(make_backend(BackendConfig("greedy")), GreedyBackend)
    faulty = make_backend(BackendConfig("faulty", p=0.5, seed=3))
    assert (faulty.p, faulty.seed) == (0.5, 3)
    with pytest.raises(ValueError):
        BackendConfig("psychic")
    with pytest.raises(ValueError):
        BackendConfig("faulty", p=1.5)


# --------------------------------------------------------------------------
# exhaustive


def test_local_candidates_pass_local_rules():
    for seed in range(6):
        db, query = seeded(seed)
        for sub in subtasks((db, query)):
            for cand in ExhaustiveBackend().generate_local(sub, db):
                assert evaluate_subplan(cand, query, db).all_pass


@pytest.mark.parametrize("seed", [0, 2, 4, 6])
def test_cheapest_accommodation_matches_enumeration(seed):
    db, query = seeded(seed)
    sub = subtasks((db, query))[ASPECTS.index("accommodation")]
    first = ExhaustiveBackend().generate_local(sub, db)[0]
    # independent enumeration: one hotel per night in the destination city
    nights = query.n_days - 1
    city = query.destinations[0]
    best = None
    for combo in itertools.product(db.hotels_in(city), repeat=nights):
        if query.required_room_type and any(h.room_type != query.required_room_type for h in combo):
            continue
        if query.required_house_rule and any("no_" + query.required_house_rule in h.house_rules for h in combo):
            continue
        cost = sum(h.price_per_night * h.rooms_needed(query.n_people) for h in combo)
        best = cost if best is None else min(best, cost)
    assert resolvable_cost(first.as_plan(), db, query) == best


def test_mini_transport_prefers_cheap_consistent_mode():
    db, query = mini()
    cands = ExhaustiveBackend().generate_local(subtasks((db, query))[0], db)
    texts = [tuple(e.transportation for e in c.entries) for c in cands]
    assert texts == [
        ("Self-driving: D0001, from Ashford to Bexley", "-", "Self-driving: D0002, from Bexley to Ashford"),
        ("Flight Number: F100, from Ashford to Bexley", "-", "Flight Number: F200, from Bexley to Ashford"),
    ]


def test_singleton_hotel_gives_fewer_candidates():
    doc = mini_doc()
    doc["database"]["accommodations"] = doc["database"]["accommodations"][:1]
    db, query = instance_from_dict(doc)
    cands = ExhaustiveBackend().generate_local(subtasks((db, query))[1], db)
    assert len(cands) == 1
    assert [e.accommodation for e in cands[0].entries] == ["Harbor Inn, Bexley", "Harbor Inn, Bexley", PLACEHOLDER]


def test_no_flight_with_only_flights_has_no_candidates():
    doc = mini_doc(required_transport="no flight")
    doc["database"]["transport_legs"] = doc["database"]["transport_legs"][:2]
    db, query = instance_from_dict(doc)
    for backend in (ExhaustiveBackend(), FaultyBackend(0.3)):
        with pytest.raises(NoCandidates):
            backend.generate_local(subtasks((db, query))[0], db)


def test_exhaustive_refine_fixes_local_violation():
    db, query = mini()
    good = ExhaustiveBackend().generate_local(subtasks((db, query))[3], db)[0]
    broken = good.with_entries(good.as_plan().with_field(2, "lunch", good.entries[0].lunch).entries)
    out = refine_loop(broken, local_selectors("meals"), ExhaustiveBackend(), 10, RefineContext(query, db, None, ("meals",)))
    assert out.converged and out.iterations_used == 1


def test_direct_plan_is_locally_greedy():
    # each aspect takes its cheapest local pick; the 3-night loft then breaks a global rule
    db, query = mini()
    report = evaluate_plan(ExhaustiveBackend().generate_plan(query, db), query, db)
    assert [v.rule for v in report.failures()] == ["minimum_nights_stay"]


# --------------------------------------------------------------------------
# greedy


def test_greedy_respects_cost_bias():
    db, query = mini()
    aware = GreedyBackend().generate_local(subtasks((db, query))[1], db)[0]
    blind = GreedyBackend().generate_local(subtasks((db, query), global_instruction_enabled=False)[1], db)[0]
    assert resolvable_cost(aware.as_plan(), db, query) <= resolvable_cost(blind.as_plan(), db, query)


def test_greedy_fields_stay_in_aspect():
    db, query = seeded(2)
    for sub in subtasks((db, query)):
        for cand in GreedyBackend().generate_local(sub, db):
            for e in cand.entries:
                for f in ("transportation", "breakfast", "attraction", "lunch", "dinner", "accommodation"):
                    if f not in ASPECT_FIELDS[sub.aspect]:
                        assert getattr(e, f) == PLACEHOLDER


# --------------------------------------------------------------------------
# faulty


def test_faulty_p0_equals_exhaustive():
    for seed in range(5):
        db, query = seeded(seed)
        for sub in subtasks((db, query)):
            assert FaultyBackend(0.0, 9).generate_local(sub, db) == ExhaustiveBackend().generate_local(sub, db)


def test_faulty_p1_breaks_every_candidate():
    for seed in range(5):
        db, query = seeded(seed)
        for sub in subtasks((db, query)):
            for cand in FaultyBackend(1.0, 9).generate_local(sub, db):
                assert not evaluate_subplan(cand, query, db).all_pass


def test_faulty_corruption_mask_golden():
    db, query = seeded(0)
    backend = FaultyBackend(0.5, 7)
    masks = {sub.aspect: backend.corruption_mask(sub, db) for sub in subtasks((db, query))}
    assert masks == {
        "transportation": [False, True, True],
        "accommodation": [True, True, False],
        "attraction": [False, True, False],
        "meals": [False, False, True],
    }


def test_faulty_seed_changes_faults():
    db, query = seeded(0)
    subs = subtasks((db, query))
    a = [FaultyBackend(0.5, 7).corruption_mask(s, db) for s in subs]
    b = [FaultyBackend(0.5, 8).corruption_mask(s, db) for s in subs]
    assert a != b


def test_faulty_refine_converges_on_local_rules():
    fixed = total = 0
    for seed in range(10):
        db, query = seeded(seed)
        backend = FaultyBackend(1.0, 1)
        for sub in subtasks((db, query)):
            for cand in backend.generate_local(sub, db):
                total += 1
                ctx = RefineContext(query, db, None, (sub.aspect,))
                out = refine_loop(cand, local_selectors(sub.aspect), backend, 10, ctx)
                fixed += out.converged
    assert fixed == total


def test_seed0_transport_matches_hand_enumeration():
    db, query = seeded(0)
    dest = query.destinations[0]
    outs = [l for l in db.transport_legs if (l.from_city, l.to_city, l.day_available) == (query.origin, dest, 1)]
    backs = [l for l in db.transport_legs if (l.from_city, l.to_city, l.day_available) == (dest, query.origin, query.n_days)]
    banned = query.required_transport.removeprefix("no ") if query.required_transport else None
    costs = []
    for a, b in itertools.product(outs, backs):
        modes = {a.mode, b.mode}
        if {"flight", "self-driving"} <= modes or banned in modes:
            continue
        costs.append((a.price_per_person + b.price_per_person) * query.n_people)
    cands = ExhaustiveBackend().generate_local(subtasks((db, query))[0], db)
    got = [resolvable_cost(c.as_plan(), db, query) for c in cands]
    assert got == sorted(costs)[: len(cands)]
    assert len(cands) == min(3, len(costs))
