"""Command line entry point.

Thin client over the same runner functions the HTTP service wraps.

Exit codes: 0 ok, 2 config or input error, 3 I/O failure, 4 log integrity
failure, 5 constraint violations detected.
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click

from .config import ScenarioConfig
from .errors import ConfigError
from .fraud import audit_report
from .replay import validate_lines, verify_lines
from .runner import run_scenario, write_artifacts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTEGRITY = 4
EXIT_VIOLATIONS = 5


def _setup_logging() -> None:
    level = os.environ.get("SFCM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _read_log(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.readlines()
    except OSError as exc:
        click.echo(f"error: cannot read log {path}: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
def main() -> None:
    """Dual-DAO fiscal credit simulator and audit tools."""
    _setup_logging()


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="Scenario JSON file.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--max-ticks", type=int, default=None, help="Override the tick budget.")
@click.option("--out", "out_dir", type=str, default="out", help="Output directory.")
def run(config_path: str | None, seed: int | None, max_ticks: int | None, out_dir: str) -> None:
    """Run a scenario and write the event log, snapshot and report."""
    try:
        config = ScenarioConfig.from_file(config_path) if config_path else ScenarioConfig()
        overrides = {}
        if seed is not None:
            overrides["seed"] = seed
        if max_ticks is not None:
            overrides["max_ticks"] = max_ticks
        if overrides:
            config = ScenarioConfig.from_dict({**config.to_dict(), **overrides})
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    artifacts = run_scenario(config)
    try:
        paths = write_artifacts(artifacts, out_dir)
    except OSError as exc:
        click.echo(f"error: cannot write artifacts: {exc}", err=True)
        sys.exit(EXIT_IO)

    click.echo(f"status: {artifacts.status}")
    for name, path in paths.items():
        click.echo(f"{name}: {path}")
    if artifacts.violations:
        for violation in artifacts.violations:
            click.echo(json.dumps(violation, sort_keys=True), err=True)
        sys.exit(EXIT_VIOLATIONS)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("log_path", type=str)
def replay(log_path: str) -> None:
    """Replay a log, verifying the hash chain and final-state constraints."""
    lines = _read_log(log_path)
    result, violations = validate_lines(lines)
    if not result.chain_ok:
        click.echo(
            f"integrity failure at seq {result.first_bad_seq}: {result.error}", err=True
        )
        sys.exit(EXIT_INTEGRITY)
    click.echo(f"replayed {len(result.events)} events, hash chain verified")
    if violations:
        for violation in violations:
            click.echo(json.dumps(violation.as_dict(), sort_keys=True), err=True)
        sys.exit(EXIT_VIOLATIONS)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("log_path", type=str)
def validate(log_path: str) -> None:
    """Replay a log and emit any constraint violations, one per line."""
    lines = _read_log(log_path)
    result, violations = validate_lines(lines)
    if not result.chain_ok:
        click.echo(
            f"integrity failure at seq {result.first_bad_seq}: {result.error}", err=True
        )
        sys.exit(EXIT_INTEGRITY)
    for violation in violations:
        click.echo(json.dumps(violation.as_dict(), sort_keys=True))
    sys.exit(EXIT_VIOLATIONS if violations else EXIT_OK)


@main.command()
@click.argument("log_path", type=str)
@click.option("--suspicion-rate", type=float, default=0.5, show_default=True)
@click.option("--weights", nargs=3, type=float, default=(1.0, 1.0, 1.0), show_default=True)
@click.option("--limit", type=float, default=2.0, show_default=True)
def audit(log_path: str, suspicion_rate: float, weights: tuple, limit: float) -> None:
    """Fast-claim detection and supplier scoreboard over a log (advisory)."""
    lines = _read_log(log_path)
    result = verify_lines(lines)
    if not result.chain_ok:
        click.echo(
            f"warning: chain broken at seq {result.first_bad_seq}, auditing prefix",
            err=True,
        )
    report = audit_report(
        result.events, suspicion_rate, tuple(weights), limit, state=result.state
    )
    for claim in report["claims"]:
        click.echo(json.dumps(claim, sort_keys=True))
    click.echo(json.dumps({"scoreboard": report["scoreboard"]}, sort_keys=True))
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
