"""Planner backend contract, shared errors and configuration."""

from __future__ import annotations

import hashlib
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Optional, Union

from ..constraints import EvaluationReport
from ..decompose import Subtask
from ..domain import Plan, Query, ReferenceDatabase, SubPlan

Item = Union[Plan, SubPlan]

BACKEND_KINDS = ("exhaustive", "greedy", "faulty", "remote", "scripted")


class GenerationFailure(RuntimeError):
    """A backend could not produce a usable plan."""


class NoCandidates(GenerationFailure):
    """No assignment of an aspect passes its local rules."""


class ParseFailure(GenerationFailure):
    """Model output could not be turned into a plan."""


@dataclass(frozen=True)
class RefineContext:
    query: Query
    db: ReferenceDatabase
    rule_filter: Optional[frozenset[str]]
    # aspects whose fields the backend may change
    aspects: tuple[str, ...]
    cost_aware: bool = True
    extra_feedback: str = ""

    def with_feedback(self, text: str) -> "RefineContext":
        return replace(self, extra_feedback=text)


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "exhaustive"
    p: float = 0.3
    seed: int = 0
    endpoint: Optional[str] = None
    model: Optional[str] = None
    api_key_env: str = "DPPM_API_KEY"
    temperature_local: float = 1.0
    temperature_merge: float = 0.2
    timeout: float = 60.0
    max_retries: int = 3
    max_concurrency: int = 4
    transcript: Optional[str] = None
    templates_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("fault probability must lie in [0, 1]")
        if self.temperature_local < 0 or self.temperature_merge < 0:
            raise ValueError("temperatures must be non-negative")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.kind == "remote" and (not self.endpoint or not self.model):
            raise ValueError("remote backend needs an endpoint and a model")
        if self.kind == "scripted" and not self.transcript:
            raise ValueError("scripted backend needs a transcript file")


class PlannerBackend(ABC):
    """The generative core of a planning agent."""

    deterministic = True

    @abstractmethod
    def generate_local(self, subtask: Subtask, db: ReferenceDatabase) -> list[SubPlan]:
        """Candidate subplans for one aspect, best first."""

    @abstractmethod
    def generate_plan(self, query: Query, db: ReferenceDatabase, cost_aware: bool = True) -> Plan:
        """A full plan in one shot (the Direct baseline)."""

    @abstractmethod
    def refine(self, item: Item, report: EvaluationReport, context: RefineContext) -> Item:
        """Revise ``item`` given the failing verdicts in ``report``."""

    @abstractmethod
    def merge_pair(
        self,
        base: Plan,
        addition: SubPlan,
        reports: tuple[EvaluationReport, EvaluationReport],
        context: RefineContext,
    ) -> Plan:
        """Reconcile a partial plan with a new subplan that conflicts with it."""


def query_key(query: Query) -> str:
    """Stable text identity of a query (independent of hash seeds)."""
    return "|".join(
        [
            query.origin,
            ",".join(query.destinations),
            str(query.n_days),
            str(query.n_people),
            str(query.budget),
            str(query.required_room_type),
            str(query.required_house_rule),
            ",".join(sorted(query.required_cuisines)),
            str(query.required_transport),
        ]
    )


def derived_rng(*parts: object) -> random.Random:
    digest = hashlib.sha256("\x1f".join(map(str, parts)).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def make_backend(config: BackendConfig) -> PlannerBackend:
    if config.kind == "exhaustive":
        from .exhaustive import ExhaustiveBackend

        return ExhaustiveBackend()
    if config.kind == "greedy":
        from .greedy import GreedyBackend

        return GreedyBackend()
    if config.kind == "faulty":
        from .faulty import FaultyBackend

        return FaultyBackend(p=config.p, seed=config.seed)
    from .remote import RemoteBackend

    return RemoteBackend.from_config(config)
