"""Planner backends: the generative core behind each planning agent."""

from .base import (
    BACKEND_KINDS,
    BackendConfig,
    GenerationFailure,
    NoCandidates,
    ParseFailure,
    PlannerBackend,
    RefineContext,
    make_backend,
)

__all__ = [
    "BACKEND_KINDS",
    "BackendConfig",
    "GenerationFailure",
    "NoCandidates",
    "ParseFailure",
    "PlannerBackend",
    "RefineContext",
    "make_backend",
]
