"""Run report assembly.

Every field is derived from the event log and the state it reconstructs, so
recomputing the report from a replayed log reproduces the one written at run
time field for field.
"""

from __future__ import annotations

from .constraints import check_all
from .core import DaoId, State
from .fraud import audit_report


def build_report(events, state: State) -> dict:
    params = state.params
    snapshot = state.snapshot_dict()
    violations = [v.as_dict() for v in check_all(snapshot)]
    fraud = audit_report(
        events,
        s_rate=params.get("suspicion_rate", "0.5"),
        weights=tuple(float(w) for w in params.get("score_weights", ["1", "1", "1"])),
        limit=float(params.get("score_limit", "2.0")),
        state=state,
    )
    workflows = []
    for wid in sorted(state.workflows):
        record = state.workflows[wid]
        workflows.append(
            {
                "id": wid,
                "final_state": record.state.value,
                "total_value": record.total_value,
                "client": record.client,
                "gc": record.gc,
                "state_ticks": {s.value: t for s, t in record.state_entered_at.items()},
                "payments_received": {
                    s.value: v for s, v in record.payments_received.items()
                },
                "payments_sent": {s.value: v for s, v in record.payments_sent.items()},
                "credit_code": record.credit_code,
            }
        )
    return {
        "metadata": {
            "seed": params.get("seed"),
            "config_digest": params.get("config_digest"),
            "status": state.run_status,
            "final_tick": state.tick,
            "event_count": len(events),
        },
        "workflows": workflows,
        "pools": {
            dao.value: {
                "minted": state.pool(dao).minted,
                "burned": state.pool(dao).burned,
                "frozen": state.pool(dao).frozen,
            }
            for dao in DaoId
        },
        "payouts": {k: state.payouts[k] for k in sorted(state.payouts)},
        "violations": violations,
        "fraud": fraud,
    }
