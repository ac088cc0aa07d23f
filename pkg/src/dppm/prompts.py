"""Prompt templates and reference-information serialization."""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .domain import ASPECTS, Query, ReferenceDatabase

TEMPLATE_NAMES = tuple(f"local_generation_{a}" for a in ASPECTS) + (
    "verify_refine",
    "incremental_merge",
    "direct_generation",
)

# placeholders that must be bound to non-empty text
REQUIRED = frozenset(
    {"query", "reference_information", "current_plan", "feedback", "plan_a", "plan_b", "feedback_a", "feedback_b"}
)


class PromptRenderError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def __post_init__(self) -> None:
        if self.name not in TEMPLATE_NAMES:
            raise ValueError(f"unknown template {self.name!r}")

    @property
    def placeholders(self) -> frozenset[str]:
        names = set()
        for _, field_name, _, _ in string.Formatter().parse(self.body):
            if field_name is not None:
                if not field_name.isidentifier():
                    raise PromptRenderError(f"{self.name}: bad placeholder {{{field_name}}}")
                names.add(field_name)
        return frozenset(names)


def render_prompt(template: PromptTemplate, bindings: Mapping[str, object]) -> str:
    needed = template.placeholders
    missing = sorted(needed - set(bindings))
    if missing:
        raise PromptRenderError(f"{template.name}: unbound placeholder(s) {', '.join(missing)}")
    empty = sorted(n for n in needed & REQUIRED if not str(bindings[n]).strip())
    if empty:
        raise PromptRenderError(f"{template.name}: empty value for required placeholder(s) {', '.join(empty)}")
    return template.body.format(**{n: bindings[n] for n in needed})


def load_template(name: str, templates_dir: Optional[str | Path] = None) -> PromptTemplate:
    if name not in TEMPLATE_NAMES:
        raise ValueError(f"unknown template {name!r}")
    if templates_dir is not None:
        body = (Path(templates_dir) / f"{name}.txt").read_text(encoding="utf-8")
    else:
        body = resources.files("dppm").joinpath("templates", f"{name}.txt").read_text(encoding="utf-8")
    return PromptTemplate(name, body)


def serialize_reference(db: ReferenceDatabase, query: Query) -> str:
    """Compact per-category tables restricted to the cities of the trip.

    Columns come in a fixed order and rows are sorted, so the text is
    byte-stable.  Our records carry no contact details, so nothing needs
    trimming here; an adapter for richer data would drop such columns.
    """
    cities = {query.origin, *query.destinations}
    blocks = []

    legs = sorted(
        (leg for leg in db.transport_legs if leg.from_city in cities and leg.to_city in cities),
        key=lambda leg: (leg.day_available, leg.from_city, leg.to_city, leg.id),
    )
    rows = [f"{l.id} | {l.mode} | {l.from_city} | {l.to_city} | {l.price_per_person} | {l.day_available}" for l in legs]
    blocks.append(_table("Transportation", "id | mode | from | to | price per person | day", rows))

    hotels = sorted((h for h in db.accommodations if h.city in cities), key=lambda h: (h.city, h.name))
    rows = [
        f"{h.name} | {h.city} | {h.price_per_night} | {h.room_type} | {', '.join(sorted(h.house_rules)) or 'none'}"
        f" | {h.minimum_nights} | {h.max_occupancy}"
        for h in hotels
    ]
    blocks.append(
        _table("Accommodations", "name | city | price per night | room type | house rules | minimum nights | max occupancy", rows)
    )

    food = sorted((r for r in db.restaurants if r.city in cities), key=lambda r: (r.city, r.name))
    rows = [f"{r.name} | {r.city} | {', '.join(sorted(r.cuisines))} | {r.avg_cost_per_person}" for r in food]
    blocks.append(_table("Restaurants", "name | city | cuisines | average cost per person", rows))

    sights = sorted((a for a in db.attractions if a.city in cities), key=lambda a: (a.city, a.name))
    blocks.append(_table("Attractions", "name | city", [f"{a.name} | {a.city}" for a in sights]))
    return "\n\n".join(blocks)


def _table(title: str, header: str, rows: list[str]) -> str:
    return "\n".join([f"{title} ({header}):"] + (rows or ["(none)"]))
