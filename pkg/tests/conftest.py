"""Shared fixtures and log-building helpers."""

from __future__ import annotations

from sfcm.config import ScenarioConfig
from sfcm.core import AsseverationKind, Role, WorkflowState, ceil_div_ratio
from sfcm.events import Event, chain_hash, snapshot_digest
from sfcm.ledger import CreditLedger
from sfcm.replay import verify_lines
from sfcm.transitions import apply_event
from sfcm.workflow import WorkflowEngine


def make_ledger(**config_overrides) -> CreditLedger:
    config = ScenarioConfig.from_dict({**ScenarioConfig().to_dict(), **config_overrides})
    return CreditLedger(config.genesis_params())


def make_world(**config_overrides):
    """Ledger plus one account per role, funded with nothing."""
    ledger = make_ledger(**config_overrides)
    engine = WorkflowEngine(ledger)
    ledger.create_account("alice", Role.INVESTOR)
    ledger.create_account("bob", Role.INVESTOR)
    ledger.create_account("gc-1", Role.GENERAL_CONTRACTOR)
    ledger.create_account("eng-1", Role.DESIGN_ARCHITECT)
    ledger.create_account("acc-1", Role.TAX_AUDITOR)
    ledger.create_account("cl-1", Role.CUSTOMER)
    ledger.create_account("cl-2", Role.CUSTOMER)
    ledger.create_account("cl-3", Role.CUSTOMER)
    return ledger, engine


def fund_contractor(ledger: CreditLedger, amount: int, investor: str = "alice",
                    gc: str = "gc-1", workflow: str | None = None) -> str:
    """Deposit and freeze so the contractor ends up holding exactly `amount`.

    Returns the credit code of the freeze link.
    """
    rate = ledger.param_fraction("discount_rate")
    requested = ceil_div_ratio(amount, rate)
    ledger.mint_investor(investor, amount, issuer=ledger.fi)
    link = ledger.freeze_and_mint(gc, requested, issuer=ledger.fi, workflow=workflow)
    assert link.operator_amount == amount
    return link.credit_code


def sign_both(engine: WorkflowEngine, wf_id: str) -> None:
    record = engine.state.workflows[wf_id]
    for kind, signer in (
        (AsseverationKind.TECHNICAL, record.engineer),
        (AsseverationKind.FINANCIAL, record.accountant),
    ):
        if not record.has_asseveration(record.state, kind):
            engine.record_asseveration(wf_id, record.state, kind, signer)


def drive_workflow(ledger: CreditLedger, engine: WorkflowEngine, wf_id: str,
                   entry_ticks: dict[WorkflowState, int]) -> None:
    """Push a workflow through the given state-entry ticks.

    Signs both asseverations and pays the due anticipation immediately before
    each advance, so every advance lands exactly at its requested tick.
    """
    order = [
        WorkflowState.ANTICIPATION,
        WorkflowState.SAL1,
        WorkflowState.SAL2,
        WorkflowState.EOW,
        WorkflowState.ARCHIVED,
    ]
    for target in order:
        if target not in entry_ticks:
            return
        ledger.set_tick(entry_ticks[target])
        record = engine.state.workflows[wf_id]
        sign_both(engine, wf_id)
        required = record.schedule.get(target, 0)
        if required > 0 and record.received(target) == 0:
            engine.record_anticipation(wf_id, target, required)
        assert engine.try_advance(wf_id), f"could not advance {wf_id} to {target}"


def forge_append(lines: list[str], kind: str, actor: str, payload: dict,
                 tick: int | None = None) -> list[str]:
    """Append an arbitrary event with a valid hash to an existing log."""
    result = verify_lines(lines)
    assert result.chain_ok, "forge_append needs a valid prefix"
    state = result.state
    seq = len(result.events)
    event_tick = state.tick if tick is None else tick
    core = {"seq": seq, "tick": event_tick, "kind": kind, "actor": actor, "payload": payload}
    apply_event(state, core)
    prev = result.events[-1].state_hash
    event = Event(
        seq=seq,
        tick=event_tick,
        kind=kind,
        actor=actor,
        payload=payload,
        state_hash=chain_hash(prev, core, snapshot_digest(state)),
    )
    return list(lines) + [event.to_line()]
