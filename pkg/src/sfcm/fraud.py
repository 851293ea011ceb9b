"""Supplier performance scoring, token incentives and fast-claim detection.

Both analyses are pure functions over the event log (or a state rebuilt from
it); only `apply_incentives` moves tokens, and it does so through the
ledger's ordinary transfer path so redistribution is itself audited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from . import events as ev
from .core import DaoId, State, STATE_ORDER, as_fraction
from .errors import InsufficientDataError, ValidationError
from .ledger import CreditLedger

_WPS_STAGES = ("Sal1", "Sal2", "Eow")


class Classification(str, Enum):
    GOOD = "Good"
    BAD = "Bad"


@dataclass
class SupplierStats:
    """Per-contractor behaviour aggregates, recomputed from logs."""

    subject: str
    t_avg_per_state: dict[str, float] = field(default_factory=dict)
    discount: float = 0.0
    p_on_time: float = 1.0

    def overall_average(self) -> float:
        if not self.t_avg_per_state:
            raise InsufficientDataError(f"no completed states observed for {self.subject}")
        return sum(self.t_avg_per_state.values()) / len(self.t_avg_per_state)


@dataclass(frozen=True)
class SuspicionReport:
    subject: str
    workflow: str
    states: tuple[str, str]
    t_actual: int
    t_expected: float
    s_rate: float
    flagged: bool
    tick: int

    def as_dict(self) -> dict:
        return {
            "subject": self.subject,
            "workflow": self.workflow,
            "states": list(self.states),
            "t_actual": self.t_actual,
            "t_expected": self.t_expected,
            "s_rate": self.s_rate,
            "flagged": self.flagged,
            "tick": self.tick,
        }


def score_supplier(
    stats: SupplierStats,
    weights: tuple[float, float, float],
    limit: float,
    t_max: float | None = None,
    normalized: bool = True,
) -> tuple[float, Classification]:
    """Weighted supplier score; Good when score <= limit.

    Normalized terms all point the same way (lower is better): completion
    time relative to the population maximum, one minus the offered discount,
    one minus the on-time ratio. `normalized=False` exposes the raw terms
    for fidelity experiments.
    """
    w1, w2, w3 = weights
    if min(w1, w2, w3) < 0:
        raise ValidationError("score weights must be non-negative")
    t_avg = stats.overall_average()
    if normalized:
        reference = t_max if t_max else t_avg
        t_term = (t_avg / reference) if reference > 0 else 0.0
        d_term = 1.0 - stats.discount
        p_term = 1.0 - stats.p_on_time
    else:
        t_term = t_avg
        d_term = stats.discount
        p_term = stats.p_on_time
    score = w1 * t_term + w2 * d_term + w3 * p_term
    classification = Classification.GOOD if score <= limit else Classification.BAD
    return score, classification


def apply_incentives(
    ledger: CreditLedger,
    classifications: dict[str, Classification],
    penalty_amount: int,
) -> list[tuple[str, str, int]]:
    """Debit Bad agents and redistribute the pot equally to Good agents.

    Penalties clip to the payer's balance. The pot routes through the
    financial institution; with no Good agent it simply stays escrowed
    there. Net token movement is zero, redistribution only.
    """
    if penalty_amount < 0:
        raise ValidationError("penalty must be >= 0")
    movements: list[tuple[str, str, int]] = []
    if penalty_amount == 0:
        return movements
    fi = ledger.fi
    bad = sorted(a for a, c in classifications.items() if c is Classification.BAD)
    good = sorted(a for a, c in classifications.items() if c is Classification.GOOD)
    pot = 0
    for agent in bad:
        balance = ledger.state.account(agent).balance(DaoId.OPERATORS)
        take = min(penalty_amount, balance)
        if take <= 0:
            continue
        ledger.transfer_operator(agent, fi, take, invoice_ref=f"incentive:penalty:{agent}")
        movements.append((agent, fi, take))
        pot += take
    if pot > 0 and good:
        base, extra = divmod(pot, len(good))
        for i, agent in enumerate(good):
            amount = base + (1 if i < extra else 0)
            if amount > 0:
                ledger.transfer_operator(
                    fi, agent, amount, invoice_ref=f"incentive:reward:{agent}"
                )
                movements.append((fi, agent, amount))
    return movements


def _scan_log(events) -> tuple[list[tuple[int, str, str, str, int]], list[dict]]:
    """Stage completions and redemption claims in log order.

    A completion is (tick, gc, workflow, state, duration in ticks), recorded
    when the workflow leaves the state.
    """
    completions: list[tuple[int, str, str, str, int]] = []
    claims: list[dict] = []
    gc_of: dict[str, str] = {}
    entered: dict[str, dict[str, int]] = {}
    for event in events:
        if event.kind == ev.WORKFLOW_OPENED:
            wid = event.payload["id"]
            gc_of[wid] = event.payload["gc"]
            entered[wid] = {"Open": event.tick}
        elif event.kind == ev.WORKFLOW_ADVANCED:
            wid = event.payload["workflow"]
            ticks = entered.setdefault(wid, {})
            left = event.payload["from"]
            start = ticks.get(left)
            if start is not None:
                completions.append(
                    (event.tick, gc_of.get(wid, ""), wid, left, event.tick - start)
                )
            ticks[event.payload["to"]] = event.tick
        elif event.kind == ev.REDEEM_CLAIM:
            claims.append(
                {
                    "tick": event.tick,
                    "gc": event.payload["gc"],
                    "workflow": event.payload["workflow"],
                    "states": (event.payload["state_a"], event.payload["state_b"]),
                    "elapsed": (event.payload["elapsed_a"], event.payload["elapsed_b"]),
                }
            )
    return completions, claims


def detect_fast_claims(
    events, s_rate: float, min_own_history: int = 3
) -> list[SuspicionReport]:
    """Flag redemption claims completed suspiciously faster than history.

    A claim spanning states (a, b) with actual elapsed time t is flagged when
    t <= s_rate * (avg(a) + avg(b)), inclusive. Averages use the claiming
    contractor's history up to the claim tick, excluding the claimed spans
    themselves; with fewer than `min_own_history` own completions per state
    the population mean bootstraps the estimate. Claims with no usable
    baseline are skipped.
    """
    s = as_fraction(s_rate)
    completions, claims = _scan_log(events)
    reports: list[SuspicionReport] = []
    for claim in claims:
        expected = Fraction(0)
        usable = True
        for state in claim["states"]:
            own = [
                d
                for (t, g, w, st, d) in completions
                if g == claim["gc"]
                and st == state
                and t <= claim["tick"]
                and w != claim["workflow"]
            ]
            if len(own) >= min_own_history:
                baseline = own
            else:
                baseline = [
                    d
                    for (t, g, w, st, d) in completions
                    if st == state and t <= claim["tick"] and w != claim["workflow"]
                ]
            if not baseline:
                usable = False
                break
            expected += Fraction(sum(baseline), len(baseline))
        if not usable:
            continue
        t_actual = claim["elapsed"][0] + claim["elapsed"][1]
        flagged = Fraction(t_actual) <= s * expected
        reports.append(
            SuspicionReport(
                subject=claim["gc"],
                workflow=claim["workflow"],
                states=claim["states"],
                t_actual=t_actual,
                t_expected=float(expected),
                s_rate=float(s),
                flagged=flagged,
                tick=claim["tick"],
            )
        )
    return reports


def supplier_stats_from_state(state: State) -> dict[str, SupplierStats]:
    """Aggregate contractor stats from workflow timing records."""
    grace = int(state.params.get("grace_ticks", 0))
    durations: dict[str, dict[str, list[int]]] = {}
    on_time: dict[str, list[bool]] = {}
    order = [s.value for s in STATE_ORDER]
    for record in state.workflows.values():
        entered = {s.value: t for s, t in record.state_entered_at.items()}
        per_gc = durations.setdefault(record.gc, {})
        for i, name in enumerate(order[:-1]):
            following = order[i + 1]
            if name in entered and following in entered:
                per_gc.setdefault(name, []).append(entered[following] - entered[name])
        projected = {s.value: t for s, t in record.projected.items()}
        for stage in _WPS_STAGES:
            if stage in entered and stage in projected:
                on_time.setdefault(record.gc, []).append(
                    entered[stage] <= projected[stage] + grace
                )
    stats: dict[str, SupplierStats] = {}
    for gc, per_state in durations.items():
        averages = {
            name: sum(values) / len(values) for name, values in per_state.items() if values
        }
        hits = on_time.get(gc, [])
        stats[gc] = SupplierStats(
            subject=gc,
            t_avg_per_state=averages,
            discount=0.0,
            p_on_time=(sum(hits) / len(hits)) if hits else 1.0,
        )
    return stats


def audit_report(
    events,
    s_rate: float,
    weights: tuple[float, float, float],
    limit: float,
    state: State | None = None,
) -> dict:
    """Advisory audit: fast-claim reports plus the supplier scoreboard."""
    if state is None:
        from .replay import rebuild_state

        state = rebuild_state(events)
    stats = supplier_stats_from_state(state)
    averages = {}
    for gc, s in stats.items():
        try:
            averages[gc] = s.overall_average()
        except InsufficientDataError:
            continue
    t_max = max(averages.values()) if averages else None
    scoreboard = []
    for gc in sorted(stats):
        row = {
            "subject": gc,
            "discount": stats[gc].discount,
            "p_on_time": stats[gc].p_on_time,
        }
        try:
            score, classification = score_supplier(stats[gc], weights, limit, t_max=t_max)
            row["t_avg"] = averages[gc]
            row["score"] = score
            row["classification"] = classification.value
        except InsufficientDataError:
            row["t_avg"] = None
            row["score"] = None
            row["classification"] = None
        scoreboard.append(row)
    claims = detect_fast_claims(events, s_rate)
    return {
        "suspicion_rate": float(as_fraction(s_rate)),
        "weights": list(weights),
        "limit": limit,
        "claims": [c.as_dict() for c in claims],
        "scoreboard": scoreboard,
    }
