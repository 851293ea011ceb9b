"""HTTP service wrapping the core simulator.

Every endpoint is a pure request/response wrapper over the same functions
the CLI invokes; runs are deterministic per (seed, config), so the service
holds no state between calls.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..config import ScenarioConfig
from ..errors import ConfigError
from ..fraud import audit_report
from ..replay import validate_lines, verify_lines
from ..runner import run_scenario
from .schemas import (
    AuditRequest,
    AuditResponse,
    LogRequest,
    ReplayResponse,
    RunRequest,
    RunResponse,
    ValidateResponse,
)

app = FastAPI(title="sfcm", version="0.1.0")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/config/defaults")
def config_defaults() -> dict:
    return ScenarioConfig().to_dict()


@app.post("/runs", response_model=RunResponse)
def create_run(request: RunRequest) -> RunResponse:
    data = dict(request.config)
    if request.seed is not None:
        data["seed"] = request.seed
    try:
        config = ScenarioConfig.from_dict({**ScenarioConfig().to_dict(), **data})
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    artifacts = run_scenario(config)
    return RunResponse(
        status=artifacts.status,
        report=artifacts.report,
        events=artifacts.lines,
        snapshot=artifacts.snapshot,
    )


@app.post("/replay", response_model=ReplayResponse)
def replay_log(request: LogRequest) -> ReplayResponse:
    result, violations = validate_lines(request.events)
    return ReplayResponse(
        chain_ok=result.chain_ok,
        first_bad_seq=result.first_bad_seq,
        error=result.error,
        event_count=len(result.events),
        violations=[v.as_dict() for v in violations],
    )


@app.post("/validate", response_model=ValidateResponse)
def validate_log(request: LogRequest) -> ValidateResponse:
    result, violations = validate_lines(request.events)
    return ValidateResponse(
        ok=result.chain_ok and not violations,
        chain_ok=result.chain_ok,
        first_bad_seq=result.first_bad_seq,
        violations=[v.as_dict() for v in violations],
    )


@app.post("/audit", response_model=AuditResponse)
def audit_log(request: AuditRequest) -> AuditResponse:
    result = verify_lines(request.events)
    report = audit_report(
        result.events,
        request.suspicion_rate,
        request.weights,
        request.limit,
        state=result.state,
    )
    return AuditResponse(
        suspicion_rate=report["suspicion_rate"],
        claims=report["claims"],
        scoreboard=report["scoreboard"],
    )
