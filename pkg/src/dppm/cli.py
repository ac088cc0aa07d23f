"""Command-line entry point: run, eval, gen-data, oracle, report."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path
from typing import Optional, Sequence

from .backends.base import BACKEND_KINDS
from .constraints import evaluate_plan
from .domain import InstanceError, dump_instance, load_instance, load_plan
from .generator import SizeParams, generate_instance
from .harness import ConfigError, RunConfig, RunReport, emit_report, load_dataset, run_strategy
from .oracle import OracleLimitError, brute_force_oracle

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def parse_seeds(text: str) -> list[int]:
    """'0..99' (inclusive), '3,5,8' or a mix like '0..4,10'."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(a, b + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        # bad flags are configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dppm", description="Multi-constraint itinerary planning pipeline.")
    sub = p.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a planning strategy over a dataset")
    run.add_argument("--strategy", required=True, choices=["direct", "sequential", "refine-only", "refine_only", "dppm"])
    run.add_argument("--backend", choices=BACKEND_KINDS)
    run.add_argument("--dataset", help="instance file or directory of instance files")
    run.add_argument("--seeds", help="generate instances from these seeds instead of --dataset")
    run.add_argument("--config", help="JSON config file; flags override it")
    run.add_argument("--k", type=int)
    run.add_argument("--refine-cap", type=int)
    run.add_argument("--merge-cap", type=int)
    run.add_argument("--no-cartesian", action="store_true")
    run.add_argument("--no-global-instruction", action="store_true")
    run.add_argument("--no-verify-refine", action="store_true")
    run.add_argument("--seed", type=int)
    run.add_argument("--p", type=float, help="fault probability for the faulty backend")
    run.add_argument("--transcript", help="transcript file for the scripted backend")
    run.add_argument("--endpoint")
    run.add_argument("--model")
    run.add_argument("--workers", type=int)
    run.add_argument("--out", help="directory for report.jsonl and summary.txt")

    ev = sub.add_parser("eval", help="score a plan file against an instance")
    ev.add_argument("--instance", required=True)
    ev.add_argument("--plan", required=True)
    ev.add_argument("--json", action="store_true", help="print the report as JSON")

    gen = sub.add_parser("gen-data", help="write synthetic instances")
    gen.add_argument("--seeds", required=True, help="e.g. 0..99")
    gen.add_argument("--out", required=True)
    for f in fields(SizeParams):
        gen.add_argument(f"--{f.name.replace('_', '-')}", type=int, dest=f.name)

    orc = sub.add_parser("oracle", help="brute-force one instance")
    orc.add_argument("--instance", required=True)
    orc.add_argument("--max-combinations", type=int)

    rep = sub.add_parser("report", help="reformat a run report")
    rep.add_argument("--input", required=True, help="report.jsonl written by 'run'")
    rep.add_argument("--format", choices=["table", "csv", "jsonl"], default="table")
    return p


def build_config(args: argparse.Namespace) -> RunConfig:
    """Built-in defaults, then the config file, then flags."""
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    backend = dict(data.get("backend", {}))
    flags = {
        "k": args.k,
        "refine_cap": args.refine_cap,
        "merge_cap": args.merge_cap,
        "seed": args.seed,
        "workers": args.workers,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    if args.no_cartesian:
        data["cartesian_enabled"] = False
    if args.no_global_instruction:
        data["global_instruction_enabled"] = False
    if args.no_verify_refine:
        data["verify_refine_enabled"] = False
    backend_flags = {"kind": args.backend, "p": args.p, "transcript": args.transcript, "endpoint": args.endpoint, "model": args.model}
    backend.update({k: v for k, v in backend_flags.items() if v is not None})
    if "seed" in data and "seed" not in backend:
        backend["seed"] = data["seed"]
    data["backend"] = backend
    return RunConfig.from_dict(data)


def _cmd_run(args) -> int:
    config = build_config(args)
    if bool(args.dataset) == bool(args.seeds):
        raise ConfigError("give exactly one of --dataset or --seeds")
    if args.dataset:
        try:
            instances = load_dataset(args.dataset)
        except (OSError, InstanceError) as exc:
            raise ConfigError(f"cannot load dataset: {exc}") from exc
    else:
        from .harness import generated_instances

        instances = generated_instances(parse_seeds(args.seeds))
    report = run_strategy(instances, args.strategy, config)
    table = emit_report(report, "table")
    print(table, end="")
    print(f"{len(report.samples)} samples in {report.wall_clock:.1f}s", file=sys.stderr)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.jsonl").write_text(report.to_jsonl())
        (out / "summary.txt").write_text(table)
    return EXIT_OK


def _cmd_eval(args) -> int:
    db, query = load_instance(Path(args.instance).read_text())
    plan = load_plan(Path(args.plan).read_text())
    report = evaluate_plan(plan, query, db)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        for v in report.verdicts:
            print(f"{v.status:>14}  {v.rule}")
        if report.failures():
            print()
            print(report.feedback())
        print(f"\n{report.pass_count} passed, {report.fail_count} failed")
    return EXIT_OK


def _cmd_gen(args) -> int:
    size = SizeParams(**{f.name: getattr(args, f.name) for f in fields(SizeParams) if getattr(args, f.name) is not None})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = parse_seeds(args.seeds)
    for seed in seeds:
        db, query = generate_instance(seed, size)
        (out / f"instance_{seed:03d}.json").write_text(dump_instance(db, query))
    print(f"wrote {len(seeds)} instances to {out}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from .oracle import OracleLimits

    db, query = load_instance(Path(args.instance).read_text())
    limits = OracleLimits(args.max_combinations) if args.max_combinations else OracleLimits()
    result = brute_force_oracle(db, query, limits)
    doc = {
        "feasible": result.feasible,
        "min_cost": result.min_cost,
        "combinations": result.combinations,
        "witness": None if result.witness is None else result.witness.to_dict(),
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _cmd_report(args) -> int:
    report = RunReport.from_jsonl(Path(args.input).read_text())
    if report.recomputed_metrics() != report.metrics:
        print("warning: stored aggregate differs from the per-sample records", file=sys.stderr)
    print(emit_report(report, args.format), end="")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "eval": _cmd_eval, "gen-data": _cmd_gen, "oracle": _cmd_oracle, "report": _cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, InstanceError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad seeds, bad plan documents, bad size parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OracleLimitError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
