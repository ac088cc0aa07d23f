"""Constraint-aware task decomposition into the four aspect subtasks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .constraints import CATALOG, GLOBAL, SANDBOX, ConstraintRule, scoped, selector_rule
from .domain import ASPECTS, Plan, Query

_PEERS = {
    "transportation": "accommodation, attractions and meals",
    "accommodation": "transportation, attractions and meals",
    "attraction": "transportation, accommodation and meals",
    "meals": "transportation, accommodation and attractions",
}


@dataclass(frozen=True)
class Partition:
    local: dict[str, frozenset[str]]
    global_rules: frozenset[str]

    def covered_rules(self) -> set[str]:
        rules = {selector_rule(s) for group in self.local.values() for s in group}
        return rules | set(self.global_rules)


@dataclass(frozen=True)
class DecomposeConfig:
    k: int = 3
    global_instruction_enabled: bool = True

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("candidate count K must be at least 2")


@dataclass(frozen=True)
class Subtask:
    aspect: str
    local_rules: frozenset[str]
    global_rule_summary: str
    query_view: Query
    candidate_count: int
    # partial plan from earlier aspects; set only by the sequential baseline
    prior: Optional[Plan] = None

    @property
    def cost_aware(self) -> bool:
        return bool(self.global_rule_summary)

    def instruction(self) -> str:
        return f"please give me a detailed {self.aspect} plan based on the user's query requirements."


def partition_constraints(query: Query, catalog: tuple[ConstraintRule, ...] = CATALOG) -> Partition:
    """Group rules by scope.  Requirement presence does not matter here:
    a rule the query never triggers still lands in its group and later
    evaluates not_applicable."""
    local: dict[str, set[str]] = {aspect: set() for aspect in ASPECTS}
    global_rules: set[str] = set()
    for rule in catalog:
        if rule.scope == GLOBAL:
            global_rules.add(rule.id)
        elif rule.id == SANDBOX:
            for aspect in rule.aspects:
                local[aspect].add(scoped(SANDBOX, aspect))
        else:
            for aspect in rule.aspects:
                local[aspect].add(rule.id)
    return Partition({a: frozenset(s) for a, s in local.items()}, frozenset(global_rules))


def global_instruction(query: Query, aspect: str) -> str:
    return (
        f"The whole trip has a total budget of ${query.budget} for {query.n_people} "
        f"{'person' if query.n_people == 1 else 'people'} over {query.n_days} days. "
        f"Other planners are handling {_PEERS[aspect]}, and they share the same budget. "
        f"Spend as little as possible on {aspect} and leave as much of the budget as you can for them."
    )


def build_subtasks(query: Query, partition: Partition, config: DecomposeConfig = DecomposeConfig()) -> list[Subtask]:
    return [
        Subtask(
            aspect=aspect,
            local_rules=partition.local[aspect],
            global_rule_summary=global_instruction(query, aspect) if config.global_instruction_enabled else "",
            query_view=query,
            candidate_count=config.k,
        )
        for aspect in ASPECTS
    ]
