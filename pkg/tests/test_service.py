"""HTTP service endpoints over the core simulator."""

from __future__ import annotations

import json

from fastapi.testclient import TestClient

from sfcm.service.app import app

client = TestClient(app)


def run_small(seed=6, workflows=1):
    response = client.post(
        "/runs", json={"config": {"workflow_count": workflows}, "seed": seed}
    )
    assert response.status_code == 200
    return response.json()


class TestHealthAndDefaults:
    def test_health(self):
        assert client.get("/health").json() == {"status": "ok"}

    def test_defaults_expose_paper_scenario(self):
        defaults = client.get("/config/defaults").json()
        assert defaults["workflow_count"] == 5
        assert defaults["value_range"] == [1_000_000, 10_000_000]
        assert defaults["discount_rate"] == 0.90


class TestRunEndpoint:
    def test_run_returns_report_and_artifacts(self):
        body = run_small()
        assert body["status"] == "completed"
        assert len(body["report"]["workflows"]) == 1
        assert body["report"]["violations"] == []
        assert body["events"]
        assert body["snapshot"]["fund_open"] is False

    def test_same_seed_same_events(self):
        assert run_small(seed=9)["events"] == run_small(seed=9)["events"]

    def test_default_config_runs_five_workflows(self):
        response = client.post("/runs", json={"seed": 12})
        assert response.status_code == 200
        assert len(response.json()["report"]["workflows"]) == 5

    def test_invalid_config_is_400(self):
        response = client.post("/runs", json={"config": {"workflow_count": -2}})
        assert response.status_code == 400

    def test_unknown_key_is_400(self):
        response = client.post("/runs", json={"config": {"bogus": 1}})
        assert response.status_code == 400


class TestReplayEndpoint:
    def test_clean_log_verifies(self):
        body = run_small()
        response = client.post("/replay", json={"events": body["events"]})
        assert response.status_code == 200
        verdict = response.json()
        assert verdict["chain_ok"] is True
        assert verdict["violations"] == []
        assert verdict["event_count"] == len(body["events"])

    def test_tampered_log_reports_bad_seq(self):
        body = run_small()
        events = body["events"]
        record = json.loads(events[3])
        record["tick"] += 1
        events[3] = json.dumps(record, sort_keys=True, separators=(",", ":"))
        verdict = client.post("/replay", json={"events": events}).json()
        assert verdict["chain_ok"] is False
        assert verdict["first_bad_seq"] == 3


class TestValidateEndpoint:
    def test_clean_log_is_ok(self):
        body = run_small()
        verdict = client.post("/validate", json={"events": body["events"]}).json()
        assert verdict["ok"] is True
        assert verdict["violations"] == []


class TestAuditEndpoint:
    def test_audit_returns_claims_and_scoreboard(self):
        body = run_small(workflows=2)
        response = client.post(
            "/audit",
            json={"events": body["events"], "suspicion_rate": 0.5},
        )
        assert response.status_code == 200
        audit = response.json()
        assert audit["suspicion_rate"] == 0.5
        assert isinstance(audit["claims"], list)
        assert audit["scoreboard"][0]["subject"] == "gc-01"
