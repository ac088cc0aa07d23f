import re
from fractions import Fraction

import pytest
from conftest import good_plan, mini

from dppm.constraints import (
    CATALOG,
    COMMONSENSE,
    FAIL,
    GLOBAL,
    HARD,
    NOT_APPLICABLE,
    PASS,
    RULE_IDS,
    EvaluationReport,
    RuleVerdict,
    applicable_rules,
    evaluate_plan,
    evaluate_subplan,
    local_selectors,
    undelivered_report,
)
from dppm.domain import Plan, PlanStructureError
from dppm.metrics import TABLE_COLUMNS, compute_metrics, format_csv, format_row, format_table, rule_pass_rate

LINE = re.compile(r"^\[(\w+)\] (day \d+|plan): .+ — .+$")


def failing(report, rule):
    v = report.verdict(rule)
    assert v is not None and v.status == FAIL, report.to_dict()
    for line in v.message.splitlines():
        assert LINE.match(line), line
        assert line.startswith(f"[{rule}]")
    return v


def test_catalog_shape():
    assert len(CATALOG) == 13
    assert sum(r.cls == COMMONSENSE for r in CATALOG) == 8
    assert sum(r.cls == HARD for r in CATALOG) == 5
    assert sum(r.scope == GLOBAL for r in CATALOG) == 5


def test_good_plan_passes_everything(mini_instance):
    db, query = mini_instance
    report = evaluate_plan(good_plan(), query, db)
    assert report.all_pass
    assert [v.rule for v in report.verdicts] == list(RULE_IDS)
    statuses = {v.rule: v.status for v in report.verdicts}
    assert statuses["cuisine"] == NOT_APPLICABLE and statuses["budget"] == PASS


def test_structure_errors_propagate(mini_instance):
    db, query = mini_instance
    with pytest.raises(PlanStructureError):
        evaluate_plan(Plan.blank(2), query, db)


def test_unknown_selector(mini_instance):
    db, query = mini_instance
    with pytest.raises(KeyError):
        evaluate_plan(good_plan(), query, db, ["no_such_rule"])


def test_sandbox_unknown_restaurant(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(2, "lunch", "Ghost Kitchen, Bexley")
    v = failing(evaluate_plan(plan, query, db), "within_sandbox")
    assert v.message == "[within_sandbox] day 2: Ghost Kitchen, Bexley — no such restaurant in the reference data"
    assert v.locations == ((2, "lunch"),)


def test_sandbox_wrong_day_flight(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(3, "transportation", "Flight Number: F100, from Ashford to Bexley")
    v = failing(evaluate_plan(plan, query, db), "within_sandbox")
    assert "only available on day 1" in v.message


def test_sandbox_selector_scopes_fields(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(2, "lunch", "Ghost Kitchen, Bexley")
    assert evaluate_plan(plan, query, db, ["within_sandbox@accommodation"]).all_pass
    assert not evaluate_plan(plan, query, db, ["within_sandbox@meals"]).all_pass


def test_complete_information(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(1, "dinner", "-")
    v = failing(evaluate_plan(plan, query, db), "complete_information")
    assert v.message == "[complete_information] day 1: - — dinner is missing"


def test_final_day_needs_no_hotel(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(3, "accommodation", "Harbor Inn, Bexley")
    failing(evaluate_plan(plan, query, db), "complete_information")


def test_within_current_city(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(2, "dinner", "Home Diner, Ashford")
    v = failing(evaluate_plan(plan, query, db), "within_current_city")
    assert "is in Ashford, not in Bexley" in v.message


def test_route_must_return(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(3, "current_city", "Bexley").with_field(3, "transportation", "-")
    v = failing(evaluate_plan(plan, query, db), "reasonable_city_route")
    assert "must return to Ashford" in v.message


def test_diverse_restaurants(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(2, "dinner", "Cafe 1, Bexley")
    v = failing(evaluate_plan(plan, query, db), "diverse_restaurants")
    assert v.message == "[diverse_restaurants] day 2: Cafe 1, Bexley — already visited on day 1"


def test_diverse_attractions(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(2, "attraction", "Old Mill, Bexley")
    failing(evaluate_plan(plan, query, db), "diverse_attractions")


def test_non_conflicting_transportation(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(3, "transportation", "Self-driving: D0002, from Bexley to Ashford")
    v = failing(evaluate_plan(plan, query, db), "non_conflicting_transportation")
    assert v.locations == ((3, "transportation"),)


def test_minimum_nights(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(1, "accommodation", "Tiny Loft, Bexley").with_field(2, "accommodation", "Tiny Loft, Bexley")
    v = failing(evaluate_plan(plan, query, db), "minimum_nights_stay")
    assert v.locations == ((1, "accommodation"), (2, "accommodation"))
    assert "below the minimum of 3" in v.message


def test_budget_exact_boundary():
    db, query = mini(budget=480)
    assert evaluate_plan(good_plan(), query, db).verdict("budget").status == PASS
    db, query = mini(budget=479)
    v = failing(evaluate_plan(good_plan(), query, db), "budget")
    assert v.message == "[budget] plan: total cost 480 — exceeds the budget of 479"


def test_room_rule():
    db, query = mini(required_house_rule="pets")
    v = failing(evaluate_plan(good_plan(), query, db), "room_rule")
    assert "does not allow pets" in v.message
    db, query = mini(required_house_rule="smoking")
    assert evaluate_plan(good_plan(), query, db).verdict("room_rule").status == PASS


def test_room_type():
    db, query = mini(required_room_type="private_room")
    failing(evaluate_plan(good_plan(), query, db), "room_type")
    db, query = mini(required_room_type="entire_room")
    assert evaluate_plan(good_plan(), query, db).all_pass


def test_cuisine():
    db, query = mini(required_cuisines=["italian", "mediterranean"])
    v = failing(evaluate_plan(good_plan(), query, db), "cuisine")
    assert v.message == "[cuisine] plan: mediterranean — no chosen restaurant serves it"


def test_transport_preference():
    db, query = mini(required_transport="no flight")
    v = failing(evaluate_plan(good_plan(), query, db), "transportation_preference")
    assert len(v.message.splitlines()) == 2
    db, query = mini(required_transport="no self-driving")
    assert evaluate_plan(good_plan(), query, db).all_pass


def test_feedback_lists_only_failures(mini_instance):
    db, query = mini_instance
    plan = good_plan().with_field(2, "dinner", "Cafe 1, Bexley").with_field(1, "dinner", "-")
    report = evaluate_plan(plan, query, db)
    assert report.fail_count == 2
    assert report.feedback().splitlines() == [
        "[complete_information] day 1: - — dinner is missing",
        "[diverse_restaurants] day 2: Cafe 1, Bexley — already visited on day 1",
    ]


def test_local_selectors():
    assert local_selectors("meals") == {"within_sandbox@meals", "diverse_restaurants", "cuisine"}
    assert local_selectors("transportation") == {
        "within_sandbox@transportation", "non_conflicting_transportation", "transportation_preference",
    }


def test_subplan_evaluation_ignores_other_aspects(mini_instance):
    from dppm.domain import SubPlan

    db, query = mini_instance
    plan = good_plan().with_field(2, "dinner", "Cafe 1, Bexley")
    meals = SubPlan.from_dict("meals", {"plan_id": 1, **plan.to_dict()})
    report = evaluate_subplan(meals, query, db)
    assert {v.rule for v in report.verdicts} == {"within_sandbox", "diverse_restaurants", "cuisine"}
    assert report.fail_count == 1


def test_undelivered_report():
    db, query = mini(required_cuisines=["french"])
    report = undelivered_report(query)
    assert report.fail_count == len(applicable_rules(query)) == 10
    assert report.verdict("room_type").status == NOT_APPLICABLE


def test_report_round_trip(mini_instance):
    db, query = mini_instance
    report = evaluate_plan(good_plan().with_field(1, "dinner", "-"), query, db)
    assert EvaluationReport.from_dict(report.to_dict()) == report


# --------------------------------------------------------------------------
# metrics


def synthetic(cs_fails: int, hard_fails: int) -> EvaluationReport:
    verdicts = []
    counts = {COMMONSENSE: cs_fails, HARD: hard_fails}
    for rule in CATALOG:
        if counts[rule.cls]:
            counts[rule.cls] -= 1
            verdicts.append(RuleVerdict(rule.id, FAIL, f"[{rule.id}] plan: x — y"))
        else:
            verdicts.append(RuleVerdict(rule.id, PASS))
    return EvaluationReport(tuple(verdicts))


def two_plan_fixture():
    # A: commonsense 8/8, hard 4/5; B: commonsense 6/8, hard 5/5
    return [(True, synthetic(0, 1)), (True, synthetic(2, 0))]


def test_metric_arithmetic():
    m = compute_metrics(two_plan_fixture())
    assert m.delivery_rate == 1
    assert m.commonsense_micro == Fraction(14, 16)
    assert m.commonsense_macro == Fraction(1, 2)
    assert m.hard_micro == Fraction(9, 10)
    assert m.hard_macro == Fraction(1, 2)
    assert m.final_pass_rate == 0
    assert format_row(m) == "100.0 87.5 50.0 90.0 50.0 0.0"


def test_identity_row():
    m = compute_metrics([(True, synthetic(0, 0))])
    assert format_row(m) == "100.0 100.0 100.0 100.0 100.0 100.0"


def test_undelivered_counts_as_failing():
    db, query = mini()
    m = compute_metrics([(True, synthetic(0, 0)), (False, undelivered_report(query))])
    assert m.delivery_rate == Fraction(1, 2)
    assert m.final_pass_rate == Fraction(1, 2)
    assert m.commonsense_micro == Fraction(8, 16)


def test_not_applicable_excluded_from_denominators(mini_instance):
    db, query = mini_instance
    m = compute_metrics([(True, evaluate_plan(good_plan(), query, db))])
    # only budget applies among the hard rules for this query
    assert m.hard_micro == 1


def test_metric_invariants_on_generated_reports():
    from conftest import seeded
    from dppm.oracle import sample_plan
    import random

    samples = []
    for seed in range(20):
        db, query = seeded(seed)
        plan = sample_plan(db, query, random.Random(seed))
        samples.append((True, evaluate_plan(plan, query, db)))
    m = compute_metrics(samples)
    assert m.commonsense_macro <= m.commonsense_micro
    assert m.final_pass_rate <= min(m.commonsense_macro, m.hard_macro)


def test_hard_macro_can_exceed_micro():
    # hard rules apply per query, so denominators differ between plans
    one_rule = EvaluationReport(tuple(
        RuleVerdict(r.id, PASS if r.cls == COMMONSENSE or r.id == "budget" else NOT_APPLICABLE) for r in CATALOG
    ))
    all_fail = synthetic(0, 5)
    m = compute_metrics([(True, one_rule), (True, all_fail)])
    assert m.hard_micro == Fraction(1, 6) and m.hard_macro == Fraction(1, 2)
    assert m.commonsense_macro <= m.commonsense_micro


def test_metrics_round_trip_and_tables():
    m = compute_metrics(two_plan_fixture())
    assert type(m).from_dict(m.to_dict()) == m
    csv_text = format_csv([("dppm", m)])
    assert csv_text.splitlines()[0] == "Method," + ",".join(TABLE_COLUMNS)
    assert csv_text.splitlines()[1] == "dppm,100.0,87.5,50.0,90.0,50.0,0.0"
    table = format_table([("dppm", m)])
    assert "Final Pass Rate" in table and "87.5" in table


def test_rule_pass_rate():
    samples = two_plan_fixture()
    assert rule_pass_rate(samples, "within_sandbox") == Fraction(1, 2)
    assert rule_pass_rate(samples, "cuisine") == 1


def test_subplan_scope_soundness():
    from conftest import seeded
    from dppm.backends.faulty import FaultyBackend
    from dppm.constraints import RULES
    from dppm.decompose import build_subtasks, partition_constraints

    for seed in range(5):
        db, query = seeded(seed)
        for sub in build_subtasks(query, partition_constraints(query)):
            for cand in FaultyBackend(1.0, seed).generate_local(sub, db):
                for v in evaluate_subplan(cand, query, db).verdicts:
                    rule = RULES[v.rule]
                    assert rule.scope != GLOBAL and sub.aspect in rule.aspects


def test_removing_offenders_never_adds_failures(mini_instance):
    db, query = mini_instance
    plan = (
        good_plan()
        .with_field(2, "dinner", "Cafe 1, Bexley")
        .with_field(2, "attraction", "Old Mill, Bexley")
        .with_field(2, "lunch", "Ghost Kitchen, Bexley")
    )
    before = evaluate_plan(plan, query, db)
    for day, field_name in [(2, "dinner"), (2, "attraction"), (2, "lunch")]:
        after = evaluate_plan(plan.with_field(day, field_name, "-"), query, db)
        for rule in ("within_sandbox", "diverse_restaurants", "diverse_attractions", "budget", "minimum_nights_stay"):
            if before.verdict(rule).status == PASS:
                assert after.verdict(rule).status == PASS


def test_oracle_agreement_on_seed0():
    import random

    from conftest import oracle_for, seeded
    from dppm.oracle import plan_passes, sample_plan

    db, query = seeded(0)
    rng = random.Random(1234)
    for _ in range(1000):
        plan = sample_plan(db, query, rng, oracle_for(0).witness)
        assert evaluate_plan(plan, query, db).all_pass == plan_passes(plan, db, query)
