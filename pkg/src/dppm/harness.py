"""End-to-end strategies, dataset runs and run reports."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from .backends.base import BackendConfig, GenerationFailure, PlannerBackend, RefineContext, make_backend
from .constraints import EvaluationReport, evaluate_plan, undelivered_report
from .decompose import DecomposeConfig, Subtask, build_subtasks, partition_constraints
from .domain import (
    ASPECTS,
    MERGE_ORDER,
    Plan,
    Query,
    ReferenceDatabase,
    is_structurally_complete,
    load_instance,
)
from .merge import Candidate, MergeConfig, overlay, run_merge
from .metrics import Metrics, compute_metrics, format_csv, format_table
from .refine import RefineBudget, refine_loop

STRATEGIES = ("direct", "sequential", "refine_only", "dppm")


class ConfigError(ValueError):
    """Invalid run configuration; raised before any sample runs."""


@dataclass(frozen=True)
class RunConfig:
    k: int = 3
    refine_cap: int = 10
    merge_cap: int = 30
    cartesian_enabled: bool = True
    global_instruction_enabled: bool = True
    verify_refine_enabled: bool = True
    backend: BackendConfig = BackendConfig()
    seed: int = 0
    workers: int = 1
    merge_workers: int = 1
    # refine calls allowed per sample across all loops; None means unlimited
    refine_budget_total: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.refine_cap < 0:
            raise ConfigError("refine cap must be non-negative")
        if self.merge_cap < 1:
            raise ConfigError("merge cap must be at least 1")
        if self.workers < 1 or self.merge_workers < 1:
            raise ConfigError("worker counts must be positive")
        if self.refine_budget_total is not None and self.refine_budget_total < 0:
            raise ConfigError("refine budget must be non-negative")

    @property
    def effective_cap(self) -> int:
        return self.refine_cap if self.verify_refine_enabled else 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values = dict(data)
        if "backend" in values:
            backend = values["backend"]
            if not isinstance(backend, dict):
                raise ConfigError("backend must be an object")
            bad = set(backend) - {f.name for f in fields(BackendConfig)}
            if bad:
                raise ConfigError(f"unknown backend keys: {sorted(bad)}")
            try:
                values["backend"] = BackendConfig(**backend)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from exc
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class Instance:
    sample_id: str
    db: ReferenceDatabase
    query: Query


@dataclass(frozen=True)
class SampleRecord:
    sample_id: str
    delivered: bool
    plan: Optional[Plan]
    report: EvaluationReport
    traces: dict = field(default_factory=dict)
    failure: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "sample",
            "sample_id": self.sample_id,
            "delivered": self.delivered,
            "plan": None if self.plan is None else self.plan.to_dict(),
            "report": self.report.to_dict(),
            "traces": self.traces,
            "failure": self.failure,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SampleRecord":
        return cls(
            data["sample_id"],
            data["delivered"],
            None if data["plan"] is None else Plan.from_dict(data["plan"]),
            EvaluationReport.from_dict(data["report"]),
            data.get("traces", {}),
            data.get("failure"),
        )


@dataclass(frozen=True)
class RunReport:
    strategy: str
    config: dict
    samples: tuple[SampleRecord, ...]
    metrics: Metrics
    wall_clock: float = field(default=0.0, compare=False)

    def recomputed_metrics(self) -> Metrics:
        return compute_metrics([(s.delivered, s.report) for s in self.samples])

    def to_jsonl(self, include_timing: bool = False) -> str:
        """Canonical JSON-lines form.  Timing is left out unless asked for,
        so identical runs serialize to identical bytes."""
        header = {"type": "run", "strategy": self.strategy, "config": self.config}
        if include_timing:
            header["wall_clock"] = round(self.wall_clock, 3)
        lines = [header] + [s.to_dict() for s in self.samples]
        lines.append({"type": "aggregate", "metrics": self.metrics.to_dict()})
        return "".join(json.dumps(line, sort_keys=True) + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "RunReport":
        header = None
        samples = []
        metrics = None
        for n, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                row = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {n}: {exc}") from exc
            kind = row.get("type")
            if kind == "run":
                header = row
            elif kind == "sample":
                samples.append(SampleRecord.from_dict(row))
            elif kind == "aggregate":
                metrics = Metrics.from_dict(row["metrics"])
            else:
                raise ValueError(f"line {n}: unknown record type {kind!r}")
        if header is None or metrics is None:
            raise ValueError("run report lacks its header or aggregate line")
        return cls(header["strategy"], header["config"], tuple(samples), metrics, header.get("wall_clock", 0.0))


# --------------------------------------------------------------------------
# strategies


def _local_candidates(
    subtask: Subtask, backend: PlannerBackend, db: ReferenceDatabase, config: RunConfig, budget
) -> tuple[list[Candidate], list[dict]]:
    query = subtask.query_view
    context = RefineContext(query, db, subtask.local_rules, (subtask.aspect,), subtask.cost_aware)
    out, notes = [], []
    for sub in backend.generate_local(subtask, db):
        outcome = refine_loop(sub, subtask.local_rules, backend, config.effective_cap, context, budget=budget)
        out.append(Candidate.build(outcome.final, outcome.report, query, db))
        notes.append(
            {
                "aspect": subtask.aspect,
                "plan_id": sub.plan_id,
                "iterations": outcome.iterations_used,
                "converged": outcome.converged,
            }
        )
    return out, notes


def _run_dppm(backend: PlannerBackend, inst: Instance, config: RunConfig, budget) -> tuple[Plan, dict]:
    query, db = inst.query, inst.db
    partition = partition_constraints(query)
    subtasks = build_subtasks(query, partition, DecomposeConfig(config.k, config.global_instruction_enabled))
    with ThreadPoolExecutor(len(subtasks)) as pool:
        futures = [pool.submit(_local_candidates, st, backend, db, config, budget) for st in subtasks]
        generated = [f.result() for f in futures]
    candidates = {st.aspect: cands for st, (cands, _) in zip(subtasks, generated)}
    local_notes = [n for _, notes in generated for n in notes]
    merge_config = MergeConfig(
        merge_cap=config.merge_cap,
        cartesian_enabled=config.cartesian_enabled,
        refine_cap=config.effective_cap,
        cost_aware=config.global_instruction_enabled,
        workers=config.merge_workers,
    )
    selected, results = run_merge(candidates, backend, query, db, merge_config, budget)
    merge_notes = [
        {
            "combination": list(r.combination.plan_ids()),
            "stages_refined": list(r.stages_refined),
            "fail_count": r.report.fail_count,
            "selected": r is selected,
        }
        for r in results
    ]
    return selected.plan, {"local": local_notes, "merge": merge_notes}


def _run_sequential(backend: PlannerBackend, inst: Instance, config: RunConfig, budget) -> tuple[Plan, dict]:
    query, db = inst.query, inst.db
    partition = partition_constraints(query)
    subtasks = {st.aspect: st for st in build_subtasks(query, partition, DecomposeConfig(config.k, config.global_instruction_enabled))}
    plan = Plan.blank(query.n_days)
    notes = []
    for aspect in MERGE_ORDER:
        st = replace(subtasks[aspect], prior=plan)
        first = backend.generate_local(st, db)[0]
        context = RefineContext(query, db, st.local_rules, (aspect,), st.cost_aware)
        outcome = refine_loop(first, st.local_rules, backend, config.effective_cap, context, budget=budget)
        plan, conflicts = overlay(plan, outcome.final)
        notes.append({"aspect": aspect, "iterations": outcome.iterations_used, "conflicts": len(conflicts)})
    return plan, {"sequential": notes}


def _run_direct(backend: PlannerBackend, inst: Instance, config: RunConfig, budget, refine: bool) -> tuple[Plan, dict]:
    plan = backend.generate_plan(inst.query, inst.db, True)
    if not refine:
        return plan, {}
    context = RefineContext(inst.query, inst.db, None, ASPECTS, True)
    outcome = refine_loop(plan, None, backend, config.effective_cap, context, budget=budget)
    return outcome.final, {"refine": {"iterations": outcome.iterations_used, "converged": outcome.converged}}


def run_sample(inst: Instance, strategy: str, config: RunConfig, backend: PlannerBackend) -> SampleRecord:
    budget = RefineBudget(config.refine_budget_total) if config.refine_budget_total is not None else None
    try:
        if strategy == "dppm":
            plan, traces = _run_dppm(backend, inst, config, budget)
        elif strategy == "sequential":
            plan, traces = _run_sequential(backend, inst, config, budget)
        else:
            plan, traces = _run_direct(backend, inst, config, budget, refine=strategy == "refine_only")
    except GenerationFailure as exc:
        return SampleRecord(inst.sample_id, False, None, undelivered_report(inst.query, str(exc)), {}, str(exc))
    if not is_structurally_complete(plan, inst.query.n_days):
        reason = "plan is not structurally complete"
        return SampleRecord(inst.sample_id, False, None, undelivered_report(inst.query, reason), traces, reason)
    return SampleRecord(inst.sample_id, True, plan, evaluate_plan(plan, inst.query, inst.db), traces)


def normalize_strategy(name: str) -> str:
    name = name.replace("-", "_")
    if name not in STRATEGIES:
        raise ConfigError(f"unknown strategy {name!r}")
    return name


def run_strategy(
    instances: Sequence[Instance],
    strategy: str,
    config: RunConfig = RunConfig(),
    backend: Optional[PlannerBackend] = None,
) -> RunReport:
    strategy = normalize_strategy(strategy)
    if not instances:
        raise ConfigError("no instances to run")
    if backend is None:
        try:
            backend = make_backend(config.backend)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"cannot build backend: {exc}") from exc
    started = time.perf_counter()
    if config.workers == 1:
        records = [run_sample(inst, strategy, config, backend) for inst in instances]
    else:
        with ThreadPoolExecutor(config.workers) as pool:
            records = list(pool.map(lambda inst: run_sample(inst, strategy, config, backend), instances))
    records.sort(key=lambda r: r.sample_id)
    metrics = compute_metrics([(r.delivered, r.report) for r in records])
    return RunReport(strategy, config.to_dict(), tuple(records), metrics, time.perf_counter() - started)


def emit_report(report: RunReport, fmt: str = "table", name: Optional[str] = None) -> str:
    label = name or report.strategy
    if fmt == "table":
        return format_table([(label, report.metrics)]) + "\n"
    if fmt == "csv":
        return format_csv([(label, report.metrics)])
    if fmt in ("jsonl", "json-lines"):
        return report.to_jsonl()
    raise ValueError(f"unknown report format {fmt!r}")


# --------------------------------------------------------------------------
# datasets


def load_dataset(path: str | Path) -> list[Instance]:
    """A single instance file, or a directory of ``*.json`` instance files."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such dataset path {path}")
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise ConfigError(f"no instance files under {path}")
    out = []
    for f in files:
        db, query = load_instance(f.read_text())
        out.append(Instance(f.stem, db, query))
    return out


def generated_instances(seeds: Sequence[int], size=None) -> list[Instance]:
    from .generator import SizeParams, generate_instance

    size = size or SizeParams()
    out = []
    for seed in seeds:
        db, query = generate_instance(seed, size)
        out.append(Instance(f"seed_{seed:03d}", db, query))
    return out
