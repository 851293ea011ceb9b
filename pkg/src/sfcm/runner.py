"""Shared scenario operations behind both the CLI and the HTTP service."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .agents import Simulation
from .config import ScenarioConfig
from .core import canonical_json
from .report import build_report


@dataclass
class RunArtifacts:
    status: str
    lines: list[str]
    snapshot: dict
    report: dict

    @property
    def violations(self) -> list[dict]:
        return self.report["violations"]


def run_scenario(config: ScenarioConfig) -> RunArtifacts:
    """Build, run and summarize one scenario."""
    result = Simulation(config).run()
    state = result.ledger.state
    events = result.ledger.log.events
    return RunArtifacts(
        status=result.status,
        lines=result.ledger.log.lines(),
        snapshot=state.snapshot_dict(),
        report=build_report(events, state),
    )


def write_artifacts(artifacts: RunArtifacts, out_dir: str) -> dict[str, str]:
    """Write events.ndjson, snapshot.json and report.json under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "events": os.path.join(out_dir, "events.ndjson"),
        "snapshot": os.path.join(out_dir, "snapshot.json"),
        "report": os.path.join(out_dir, "report.json"),
    }
    with open(paths["events"], "w", encoding="utf-8") as fh:
        for line in artifacts.lines:
            fh.write(line)
            fh.write("\n")
    with open(paths["snapshot"], "w", encoding="utf-8") as fh:
        fh.write(canonical_json(artifacts.snapshot))
        fh.write("\n")
    with open(paths["report"], "w", encoding="utf-8") as fh:
        json.dump(artifacts.report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
