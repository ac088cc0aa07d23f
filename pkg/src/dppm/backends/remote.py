"""Chat-model backend, plus a scripted client that replays transcripts."""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Protocol, Sequence

import httpx

from ..constraints import EvaluationReport
from ..decompose import Subtask
from ..domain import (
    ASPECT_FIELDS,
    CONTENT_FIELDS,
    PLACEHOLDER,
    Plan,
    Query,
    ReferenceDatabase,
    SubPlan,
    validate_structure,
)
from ..prompts import PromptTemplate, load_template, render_prompt, serialize_reference
from .base import BackendConfig, GenerationFailure, Item, ParseFailure, PlannerBackend, RefineContext

log = logging.getLogger(__name__)

SYSTEM_MESSAGE = "You are a careful travel planner. You answer with JSON only."
NO_FINDINGS = "No violations were found."


class TransportError(GenerationFailure):
    """The chat endpoint could not be reached or answered with an error."""


class ChatClient(Protocol):
    def complete(self, messages: list[dict[str, str]], temperature: float) -> str: ...


class HttpChatClient:
    """Minimal chat-completion client (OpenAI-style request and response)."""

    def __init__(self, endpoint: str, model: str, api_key: str, timeout: float = 60.0) -> None:
        self.endpoint = endpoint
        self.model = model
        self._headers = {"Authorization": f"Bearer {api_key}"}
        self._timeout = timeout

    def complete(self, messages: list[dict[str, str]], temperature: float) -> str:
        body = {"model": self.model, "messages": messages, "temperature": temperature}
        try:
            # one client per request keeps concurrent calls isolated
            with httpx.Client(timeout=self._timeout) as client:
                resp = client.post(self.endpoint, json=body, headers=self._headers)
                resp.raise_for_status()
                data = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response shape: {exc!r}") from exc


class ScriptedChatClient:
    """Replays recorded responses in order.

    Each entry holds ``response`` (text to return) or ``error`` (raised as a
    transport error), plus an optional ``match`` substring: an entry with a
    match is only used for prompts containing it.  Every request is kept in
    ``requests`` for inspection.
    """

    def __init__(self, entries: Sequence[dict[str, Any]]) -> None:
        for i, e in enumerate(entries):
            if ("response" in e) == ("error" in e):
                raise ValueError(f"transcript entry {i} needs exactly one of 'response' or 'error'")
        self._entries = list(entries)
        self._used = [False] * len(self._entries)
        self._lock = threading.Lock()
        self.requests: list[dict[str, Any]] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedChatClient":
        text = Path(path).read_text(encoding="utf-8")
        stripped = text.lstrip()
        if stripped.startswith("["):
            entries = json.loads(text)
        else:
            entries = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls(entries)

    def complete(self, messages: list[dict[str, str]], temperature: float) -> str:
        prompt = messages[-1]["content"]
        with self._lock:
            self.requests.append({"messages": messages, "temperature": temperature})
            for i, entry in enumerate(self._entries):
                if self._used[i] or entry.get("match", "") not in prompt:
                    continue
                self._used[i] = True
                break
            else:
                raise TransportError("transcript exhausted")
        if "error" in entry:
            raise TransportError(entry["error"])
        return entry["response"]

    @property
    def remaining(self) -> int:
        return self._used.count(False)


def extract_json(text: str, opener: str) -> Any:
    """First well-formed JSON value starting with ``opener`` ('[' or '{')."""
    decoder = json.JSONDecoder()
    pos = text.find(opener)
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(text, pos)
            return value
        except json.JSONDecodeError:
            pos = text.find(opener, pos + 1)
    kind = "array" if opener == "[" else "object"
    raise ParseFailure(f"no well-formed JSON {kind} in the reply")


def parse_candidates(text: str, aspect: str, n_days: int) -> list[SubPlan]:
    data = extract_json(text, "[")
    if not isinstance(data, list) or not data:
        raise ParseFailure("expected a non-empty JSON array of plans")
    out = []
    for i, raw in enumerate(data, start=1):
        try:
            sub = SubPlan.from_dict(aspect, raw)
            validate_structure(sub.entries, n_days)
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ParseFailure(f"plan {i}: {exc}") from exc
        out.append(sub)
    return out


def parse_plan(text: str, n_days: int) -> Plan:
    data = extract_json(text, "{")
    try:
        plan = Plan.from_dict(data)
        validate_structure(plan.entries, n_days)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise ParseFailure(str(exc)) from exc
    return plan


def _project(plan: Plan, aspect: str) -> tuple:
    keep = set(ASPECT_FIELDS[aspect])
    return tuple(replace(e, **{f: PLACEHOLDER for f in CONTENT_FIELDS if f not in keep}) for e in plan.entries)


def _show(item: Item) -> str:
    plan = item.as_plan() if isinstance(item, SubPlan) else item
    return json.dumps(plan.to_dict(), indent=2)


class RemoteBackend(PlannerBackend):
    deterministic = False

    def __init__(self, client: ChatClient, config: BackendConfig = BackendConfig()) -> None:
        self.client = client
        self.config = config
        self._gate = threading.BoundedSemaphore(config.max_concurrency)
        self._templates: dict[str, PromptTemplate] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_config(cls, config: BackendConfig) -> "RemoteBackend":
        if config.kind == "scripted":
            return cls(ScriptedChatClient.from_file(config.transcript), config)
        key = os.environ.get(config.api_key_env)
        if not key:
            raise ValueError(f"environment variable {config.api_key_env} is not set")
        return cls(HttpChatClient(config.endpoint, config.model, key, config.timeout), config)

    def template(self, name: str) -> PromptTemplate:
        with self._lock:
            if name not in self._templates:
                self._templates[name] = load_template(name, self.config.templates_dir)
            return self._templates[name]

    def _chat(self, prompt: str, temperature: float) -> str:
        messages = [{"role": "system", "content": SYSTEM_MESSAGE}, {"role": "user", "content": prompt}]
        with self._gate:
            return self.client.complete(messages, temperature)

    def _with_retries(self, prompt: str, temperature: float, parse, what: str):
        last: Optional[Exception] = None
        current = prompt
        for attempt in range(1 + self.config.max_retries):
            try:
                return parse(self._chat(current, temperature))
            except ParseFailure as exc:
                log.info("%s: unparsable reply on attempt %d: %s", what, attempt + 1, exc)
                last = exc
                current = f"{prompt}\n\nYour previous reply could not be parsed ({exc}). Reply again with the JSON only."
            except TransportError as exc:
                log.info("%s: transport error on attempt %d: %s", what, attempt + 1, exc)
                last = exc
        raise GenerationFailure(f"{what} failed after {1 + self.config.max_retries} attempts: {last}")

    def generate_local(self, subtask: Subtask, db: ReferenceDatabase) -> list[SubPlan]:
        query = subtask.query_view
        prompt = render_prompt(
            self.template(f"local_generation_{subtask.aspect}"),
            {
                "query": query.describe(),
                "reference_information": serialize_reference(db, query),
                "global_instruction": subtask.global_rule_summary,
                "candidate_count": subtask.candidate_count,
            },
        )
        return self._with_retries(
            prompt,
            self.config.temperature_local,
            lambda text: parse_candidates(text, subtask.aspect, query.n_days),
            f"{subtask.aspect} generation",
        )

    def generate_plan(self, query: Query, db: ReferenceDatabase, cost_aware: bool = True) -> Plan:
        prompt = render_prompt(
            self.template("direct_generation"),
            {"query": query.describe(), "reference_information": serialize_reference(db, query)},
        )
        return self._with_retries(
            prompt, self.config.temperature_local, lambda text: parse_plan(text, query.n_days), "plan generation"
        )

    def refine(self, item: Item, report: EvaluationReport, context: RefineContext) -> Item:
        feedback = report.feedback()
        if context.extra_feedback:
            feedback = f"{feedback}\n{context.extra_feedback}" if feedback else context.extra_feedback
        prompt = render_prompt(
            self.template("verify_refine"),
            {
                "query": context.query.describe(),
                "reference_information": serialize_reference(context.db, context.query),
                "current_plan": _show(item),
                "feedback": feedback or NO_FINDINGS,
            },
        )
        # a parse failure here propagates: the refine loop counts it and feeds it back
        plan = parse_plan(self._chat(prompt, self.config.temperature_merge), context.query.n_days)
        if isinstance(item, SubPlan):
            return item.with_entries(_project(plan, item.aspect))
        return plan

    def merge_pair(
        self,
        base: Plan,
        addition: SubPlan,
        reports: tuple[EvaluationReport, EvaluationReport],
        context: RefineContext,
    ) -> Plan:
        prompt = render_prompt(
            self.template("incremental_merge"),
            {
                "query": context.query.describe(),
                "reference_information": serialize_reference(context.db, context.query),
                "plan_a": _show(base),
                "feedback_a": reports[0].feedback() or NO_FINDINGS,
                "plan_b": _show(addition),
                "feedback_b": reports[1].feedback() or NO_FINDINGS,
            },
        )
        return self._with_retries(
            prompt,
            self.config.temperature_merge,
            lambda text: parse_plan(text, context.query.n_days),
            "merge",
        )
