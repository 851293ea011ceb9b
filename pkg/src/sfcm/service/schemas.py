"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config: dict = Field(default_factory=dict, description="Scenario overrides")
    seed: int | None = None


class RunResponse(BaseModel):
    status: str
    report: dict
    events: list[str]
    snapshot: dict


class LogRequest(BaseModel):
    events: list[str]


class ReplayResponse(BaseModel):
    chain_ok: bool
    first_bad_seq: int | None = None
    error: str | None = None
    event_count: int
    violations: list[dict]


class ValidateResponse(BaseModel):
    ok: bool
    chain_ok: bool
    first_bad_seq: int | None = None
    violations: list[dict]


class AuditRequest(LogRequest):
    suspicion_rate: float = 0.5
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    limit: float = 2.0


class AuditResponse(BaseModel):
    suspicion_rate: float
    claims: list[dict]
    scoreboard: list[dict]
