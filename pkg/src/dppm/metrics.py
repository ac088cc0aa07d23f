"""Benchmark metrics: delivery, micro/macro pass rates, final pass rate."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

from .constraints import COMMONSENSE, HARD, NOT_APPLICABLE, PASS, RULES, EvaluationReport

TABLE_COLUMNS = (
    "Delivery Rate",
    "Commonsense Micro",
    "Commonsense Macro",
    "Hard Micro",
    "Hard Macro",
    "Final Pass Rate",
)


@dataclass(frozen=True)
class Metrics:
    delivery_rate: Fraction
    commonsense_micro: Fraction
    commonsense_macro: Fraction
    hard_micro: Fraction
    hard_macro: Fraction
    final_pass_rate: Fraction

    def values(self) -> tuple[Fraction, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def percentages(self) -> tuple[str, ...]:
        return tuple(f"{float(v * 100):.1f}" for v in self.values())

    def to_dict(self) -> dict[str, str]:
        return {f.name: str(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict[str, str]) -> "Metrics":
        return cls(**{f.name: Fraction(data[f.name]) for f in fields(cls)})


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def compute_metrics(samples: Sequence[tuple[bool, EvaluationReport]]) -> Metrics:
    """Aggregate per-sample reports.

    Micro rates count pass verdicts over applicable verdicts of a class;
    macro rates count plans with no failure in the class.  An undelivered
    sample fails every applicable rule in its report.
    """
    if not samples:
        raise ValueError("compute_metrics needs at least one sample")
    passed = {COMMONSENSE: 0, HARD: 0}
    total = {COMMONSENSE: 0, HARD: 0}
    clean = {COMMONSENSE: 0, HARD: 0}
    final = 0
    delivered_count = 0
    for delivered, report in samples:
        delivered_count += bool(delivered)
        failures = {COMMONSENSE: 0, HARD: 0}
        for v in report.verdicts:
            if v.status == NOT_APPLICABLE:
                continue
            cls = RULES[v.rule].cls
            total[cls] += 1
            if delivered and v.status == PASS:
                passed[cls] += 1
            else:
                failures[cls] += 1
        for cls in clean:
            clean[cls] += failures[cls] == 0 and delivered
        final += delivered and failures[COMMONSENSE] == 0 and failures[HARD] == 0
    n = len(samples)
    return Metrics(
        delivery_rate=Fraction(delivered_count, n),
        commonsense_micro=_ratio(passed[COMMONSENSE], total[COMMONSENSE]),
        commonsense_macro=Fraction(clean[COMMONSENSE], n),
        hard_micro=_ratio(passed[HARD], total[HARD]),
        hard_macro=Fraction(clean[HARD], n),
        final_pass_rate=Fraction(final, n),
    )


def rule_pass_rate(reports: Iterable[tuple[bool, EvaluationReport]], rule: str) -> Fraction:
    """Pass fraction of one rule over the samples where it applies."""
    hits = seen = 0
    for delivered, report in reports:
        v = report.verdict(rule)
        if v is None or v.status == NOT_APPLICABLE:
            continue
        seen += 1
        hits += delivered and v.status == PASS
    return _ratio(hits, seen)


def format_row(metrics: Metrics) -> str:
    return " ".join(metrics.percentages())


def format_table(rows: Sequence[tuple[str, Metrics]]) -> str:
    name_width = max([len("Method")] + [len(name) for name, _ in rows])
    widths = [len(c) for c in TABLE_COLUMNS]
    header = "Method".ljust(name_width) + "  " + "  ".join(c.rjust(w) for c, w in zip(TABLE_COLUMNS, widths))
    lines = [header, "-" * len(header)]
    for name, m in rows:
        cells = "  ".join(p.rjust(w) for p, w in zip(m.percentages(), widths))
        lines.append(name.ljust(name_width) + "  " + cells)
    return "\n".join(lines)


def format_csv(rows: Sequence[tuple[str, Metrics]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("Method",) + TABLE_COLUMNS)
    for name, m in rows:
        writer.writerow((name,) + m.percentages())
    return buf.getvalue()

