"""Knowledge-base constraints: six pure checkers over a system snapshot.

Checkers consume the plain-dict snapshot produced by `State.snapshot_dict()`
(or reconstructed by log replay) and never mutate it. The same rules run
inline as operation preconditions; the offline pass exists so a replayed log
can be audited independently of the code that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

_STATE_SEQUENCE = ["Open", "Anticipation", "Sal1", "Sal2", "Eow", "Archived"]
_STATE_POS = {name: i for i, name in enumerate(_STATE_SEQUENCE)}
_WPS_SEQUENCE = ["Sal1", "Sal2", "Eow"]


class ConstraintId(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    C6 = "C6"


CONSTRAINT_META = {
    ConstraintId.C1: "workflow state one-hot and on schedule",
    ConstraintId.C2: "period token demand within prior-period forecast",
    ConstraintId.C3: "state spending within received anticipation",
    ConstraintId.C4: "at most two open workflows per client",
    ConstraintId.C5: "both asseverations present for every passed state",
    ConstraintId.C6: "contractor portfolio within SOA certification cap",
}


@dataclass(frozen=True)
class Violation:
    constraint: ConstraintId
    subject: str
    tick: int
    detail: str
    measured: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "constraint": self.constraint.value,
            "subject": self.subject,
            "tick": self.tick,
            "detail": self.detail,
            "measured": dict(self.measured),
        }


@dataclass(frozen=True)
class ForecastPoint:
    state: str
    tick: int
    amount: int


@dataclass(frozen=True)
class ForecastSeries:
    """Per-stage demand forecast; aggregates into per-period totals."""

    points: tuple[ForecastPoint, ...] = ()

    def forecast_by_period(self, period_ticks: int) -> dict[int, int]:
        series: dict[int, int] = {}
        for point in self.points:
            period = point.tick // period_ticks
            series[period] = series.get(period, 0) + point.amount
        return series

    def total(self) -> int:
        return sum(p.amount for p in self.points)


def check_c1(snapshot: dict) -> list[Violation]:
    """One-hot state encoding, and progress within the projected schedule."""
    violations = []
    tick = snapshot["tick"]
    grace = int(snapshot["params"].get("grace_ticks", 0))
    for wid in sorted(snapshot["workflows"]):
        wf = snapshot["workflows"][wid]
        flags = wf.get("state_flags", [wf["state"]])
        if len(flags) != 1 or flags[0] != wf["state"]:
            violations.append(
                Violation(
                    ConstraintId.C1,
                    wid,
                    tick,
                    f"state encoding not one-hot: {flags}",
                    {"flags_set": len(flags)},
                )
            )
            continue
        if wf["state"] == "Archived":
            continue
        position = _STATE_POS[wf["state"]]
        for stage in _WPS_SEQUENCE:
            projected = wf.get("projected", {}).get(stage)
            if projected is None or position >= _STATE_POS[stage]:
                continue
            if tick > projected + grace:
                violations.append(
                    Violation(
                        ConstraintId.C1,
                        wid,
                        tick,
                        f"{stage} projected by tick {projected}, "
                        f"still {wf['state']} at {tick} (grace {grace})",
                        {"projected": projected, "tick": tick, "grace": grace},
                    )
                )
            break
    return violations


def check_c2(snapshot: dict) -> list[Violation]:
    """Token demand per period must not exceed the prior period's forecast."""
    violations = []
    tick = snapshot["tick"]
    c2 = snapshot.get("c2", {})
    demand = {int(k): v for k, v in c2.get("demand", {}).items()}
    forecast = {int(k): v for k, v in c2.get("forecast", {}).items()}
    supply = {int(k): v for k, v in c2.get("period_supply", {}).items()}
    for period in sorted(demand):
        d = demand[period]
        if d <= 0:
            continue
        # With no registered forecast, the free supply observed at the first
        # request of the period bounds the demand instead.
        allowed = forecast.get(period - 1, supply.get(period))
        if allowed is None:
            continue
        if d > allowed:
            violations.append(
                Violation(
                    ConstraintId.C2,
                    f"period-{period}",
                    tick,
                    f"demand {d} exceeds forecast {allowed}",
                    {"demand": d, "forecast": allowed},
                )
            )
    return violations


def check_c3(snapshot: dict) -> list[Violation]:
    """Spend no more than the anticipation allocated for each state."""
    violations = []
    tick = snapshot["tick"]
    for wid in sorted(snapshot["workflows"]):
        wf = snapshot["workflows"][wid]
        for state in _STATE_SEQUENCE:
            sent = wf.get("sent", {}).get(state, 0)
            received = wf.get("received", {}).get(state, 0)
            if sent > received:
                violations.append(
                    Violation(
                        ConstraintId.C3,
                        wid,
                        tick,
                        f"{state}: sent {sent} exceeds received {received}",
                        {"sent": sent, "received": received},
                    )
                )
    return violations


def check_c4(snapshot: dict) -> list[Violation]:
    """Each client may hold at most two non-archived workflows."""
    violations = []
    tick = snapshot["tick"]
    per_client: dict[str, int] = {}
    for wf in snapshot["workflows"].values():
        if wf["state"] != "Archived":
            per_client[wf["client"]] = per_client.get(wf["client"], 0) + 1
    for client in sorted(per_client):
        count = per_client[client]
        if count > 2:
            violations.append(
                Violation(
                    ConstraintId.C4,
                    client,
                    tick,
                    f"client holds {count} open workflows, limit 2",
                    {"open_workflows": count},
                )
            )
    return violations


def check_c5(snapshot: dict) -> list[Violation]:
    """Every passed state needs both technical and financial asseverations."""
    violations = []
    tick = snapshot["tick"]
    for wid in sorted(snapshot["workflows"]):
        wf = snapshot["workflows"][wid]
        position = _STATE_POS.get(wf["state"], 0)
        signed = {(a["state"], a["kind"]) for a in wf.get("asseverations", [])}
        for state in _STATE_SEQUENCE[:position]:
            missing = [
                kind
                for kind in ("Technical", "Financial")
                if (state, kind) not in signed
            ]
            if missing:
                violations.append(
                    Violation(
                        ConstraintId.C5,
                        wid,
                        tick,
                        f"{state} passed without {' and '.join(missing)} asseveration",
                        {"state_position": _STATE_POS[state]},
                    )
                )
    return violations


def check_c6(snapshot: dict) -> list[Violation]:
    """Contractor open portfolios must stay within the SOA cap."""
    violations = []
    tick = snapshot["tick"]
    cap = int(snapshot["params"].get("soa_cap", 0))
    if cap <= 0:
        return violations
    per_gc: dict[str, int] = {}
    for wf in snapshot["workflows"].values():
        if wf["state"] != "Archived":
            per_gc[wf["gc"]] = per_gc.get(wf["gc"], 0) + wf["total_value"]
    for gc in sorted(per_gc):
        total = per_gc[gc]
        if total > cap:
            violations.append(
                Violation(
                    ConstraintId.C6,
                    gc,
                    tick,
                    f"open works total {total} exceeds SOA cap {cap}",
                    {"total": total, "cap": cap},
                )
            )
    return violations


_CHECKERS = (check_c1, check_c2, check_c3, check_c4, check_c5, check_c6)


def check_all(snapshot: dict) -> list[Violation]:
    """Run all six checkers; violations sorted by (constraint, subject, tick)."""
    violations: list[Violation] = []
    for checker in _CHECKERS:
        violations.extend(checker(snapshot))
    violations.sort(key=lambda v: (v.constraint.value, v.subject, v.tick))
    return violations
