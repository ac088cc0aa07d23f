"""Evaluate, feed violations back, re-plan; stop on all-pass or at the cap."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from typing import IO, Iterable, Optional

from .backends.base import GenerationFailure, Item, ParseFailure, PlannerBackend, RefineContext
from .constraints import EvaluationReport, evaluate_plan
from .domain import Plan, PlanStructureError, SubPlan


@dataclass(frozen=True)
class RefineOutcome:
    final: Item
    report: EvaluationReport
    iterations_used: int
    converged: bool
    failure: Optional[str] = None


class RefineBudget:
    """Refine calls shared by every loop of one sample."""

    def __init__(self, total: int) -> None:
        if total < 0:
            raise ValueError("refine budget must be non-negative")
        self.remaining = total
        self._lock = threading.Lock()

    def take(self) -> bool:
        with self._lock:
            if self.remaining <= 0:
                return False
            self.remaining -= 1
            return True


class TraceLog:
    """Line-delimited record of refine iterations.

    Records are kept in memory; pass ``stream`` to also write them out as
    JSON lines as they happen.
    """

    def __init__(self, stream: Optional[IO[str]] = None, **tags) -> None:
        self.records: list[dict] = []
        self._stream = stream
        self._tags = tags
        self._lock = threading.Lock()

    def tagged(self, **tags) -> "TraceLog":
        child = TraceLog(self._stream, **{**self._tags, **tags})
        child.records = self.records
        child._lock = self._lock
        return child

    def record(self, iteration: int, item: Item, report: Optional[EvaluationReport], note: str = "") -> None:
        row = dict(self._tags)
        row.update(
            iteration=iteration,
            item=_as_plan(item).fingerprint(),
            fail_count=None if report is None else report.fail_count,
            failing=[] if report is None else [v.rule for v in report.failures()],
        )
        if note:
            row["note"] = note
        with self._lock:
            self.records.append(row)
            if self._stream is not None:
                self._stream.write(json.dumps(row, sort_keys=True) + "\n")


def _as_plan(item: Item) -> Plan:
    return item.as_plan() if isinstance(item, SubPlan) else item


def evaluate_item(item: Item, context: RefineContext, rule_filter: Optional[Iterable[str]]) -> EvaluationReport:
    return evaluate_plan(_as_plan(item), context.query, context.db, rule_filter)


def refine_loop(
    item: Item,
    rule_filter: Optional[frozenset[str]],
    backend: PlannerBackend,
    cap: int = 10,
    context: Optional[RefineContext] = None,
    trace: Optional[TraceLog] = None,
    budget: Optional[RefineBudget] = None,
) -> RefineOutcome:
    """Run the verify-refine loop on one plan or subplan.

    On non-convergence the item with the fewest failures is returned
    (later items win ties).  The loop also stops early when the backend
    hands back the item unchanged, since another call would do the same.
    """
    if cap < 0:
        raise ValueError("cap must be non-negative")
    if context is None:
        raise ValueError("refine_loop needs a RefineContext")
    context = replace(context, rule_filter=rule_filter)
    report = evaluate_item(item, context, rule_filter)
    if trace is not None:
        trace.record(0, item, report)
    best, best_report = item, report
    used = 0
    failure = None
    ctx = context
    while not report.all_pass and used < cap:
        if budget is not None and not budget.take():
            failure = "shared refine budget exhausted"
            break
        used += 1
        try:
            revised = backend.refine(item, report, ctx)
            new_report = evaluate_item(revised, context, rule_filter)
        except (ParseFailure, PlanStructureError) as exc:
            # a malformed revision still costs a round; its error becomes feedback
            ctx = context.with_feedback(f"Your previous answer could not be used: {exc}")
            if trace is not None:
                trace.record(used, item, None, note=f"parse failure: {exc}")
            continue
        except GenerationFailure as exc:
            failure = str(exc)
            break
        ctx = context
        if trace is not None:
            trace.record(used, revised, new_report)
        if revised == item:
            break
        item, report = revised, new_report
        if report.fail_count <= best_report.fail_count:
            best, best_report = item, report
    return RefineOutcome(best, best_report, used, best_report.all_pass, failure)
