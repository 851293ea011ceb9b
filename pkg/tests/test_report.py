"""Run report: derivability from the log and partial-run reporting."""

from __future__ import annotations

from sfcm.agents import run as run_simulation
from sfcm.config import ScenarioConfig
from sfcm.replay import verify_lines
from sfcm.report import build_report
from sfcm.runner import run_scenario


class TestReportReplayEquivalence:
    def test_report_recomputed_from_log_matches(self):
        config = ScenarioConfig(seed=21, workflow_count=3)
        artifacts = run_scenario(config)
        replayed = verify_lines(artifacts.lines)
        assert replayed.chain_ok
        recomputed = build_report(replayed.events, replayed.state)
        assert recomputed == artifacts.report

    def test_metadata_names_seed_and_config_digest(self):
        config = ScenarioConfig(seed=21, workflow_count=1)
        artifacts = run_scenario(config)
        assert artifacts.report["metadata"]["seed"] == 21
        assert artifacts.report["metadata"]["config_digest"] == config.digest()
        assert artifacts.report["metadata"]["status"] == "completed"

    def test_payout_table_matches_ledger(self):
        result = run_simulation(ScenarioConfig(seed=3, workflow_count=2))
        report = build_report(result.events, result.ledger.state)
        assert report["payouts"] == result.payouts
        assert report["pools"]["Investors"]["burned"] == (
            report["pools"]["Investors"]["minted"]
        )


class TestPartialRuns:
    def test_budget_exhaustion_reports_partial_status(self):
        config = ScenarioConfig(
            seed=3,
            workflow_count=1,
            gc_approval_threshold=0.0,
            technician_approval_threshold=0.0,
            max_ticks=5,
        )
        artifacts = run_scenario(config)
        assert artifacts.status == "partial"
        assert artifacts.report["metadata"]["status"] == "partial"
        assert artifacts.report["payouts"] == {}
        row = artifacts.report["workflows"][0]
        assert row["final_state"] == "Open"
