"""Mechanical state transitions, one per event kind.

This module is the single source of truth for how an event mutates state.
Live operations validate their preconditions, build a payload, and then run
the same apply function that log replay runs, so a replayed state is
bit-identical to the live one by construction.

Apply functions perform no business validation. Gates live in ledger.py and
workflow.py; offline legality is re-established by the constraint checkers.
"""

from __future__ import annotations

from . import events as ev
from .core import (
    Account,
    Asseveration,
    AsseverationKind,
    CreditState,
    DaoId,
    FreezeLink,
    LinkStatus,
    Role,
    State,
    TaxCredit,
    WorkflowRecord,
    WorkflowState,
)
from .errors import IntegrityError


def _period(state: State, tick: int) -> int:
    return tick // int(state.params.get("c2_period_ticks", 30))


def _apply_genesis(state: State, tick: int, payload: dict) -> None:
    state.params.update(payload["params"])


def _apply_account_created(state: State, tick: int, payload: dict) -> None:
    state.accounts[payload["id"]] = Account(payload["id"], Role(payload["role"]))


def _apply_investor_deposit(state: State, tick: int, payload: dict) -> None:
    investor = payload["investor"]
    amount = payload["amount"]
    account = state.accounts[investor]
    account.balances[DaoId.INVESTORS] = account.balance(DaoId.INVESTORS) + amount
    state.pool(DaoId.INVESTORS).minted += amount
    state.shares[investor] = state.shares.get(investor, 0) + amount


def _apply_freeze_and_mint(state: State, tick: int, payload: dict) -> None:
    frozen = payload["frozen"]
    gc = state.accounts[payload["gc"]]
    investors = state.pool(DaoId.INVESTORS)
    operators = state.pool(DaoId.OPERATORS)

    period = _period(state, tick)
    if period not in state.period_supply:
        state.period_supply[period] = investors.free
    state.demand[period] = state.demand.get(period, 0) + frozen

    investors.frozen += frozen
    operators.minted += frozen
    gc.balances[DaoId.OPERATORS] = gc.balance(DaoId.OPERATORS) + frozen

    code = payload["credit_code"]
    state.links[code] = FreezeLink(code, frozen, frozen, frozen)
    state.credits[code] = TaxCredit(
        credit_code=code,
        spend_amount=payload["spend"],
        face_value=payload["face_value"],
        workflow=payload.get("workflow"),
    )
    workflow = payload.get("workflow")
    if workflow is not None:
        state.workflows[workflow].credit_code = code


def _apply_transfer(state: State, tick: int, payload: dict) -> None:
    amount = payload["amount"]
    src = state.accounts[payload["src"]]
    dst = state.accounts[payload["dst"]]
    src.balances[DaoId.OPERATORS] = src.balance(DaoId.OPERATORS) - amount
    dst.balances[DaoId.OPERATORS] = dst.balance(DaoId.OPERATORS) + amount
    workflow = payload.get("workflow")
    if workflow is not None:
        wf = state.workflows[workflow]
        wf_state = WorkflowState(payload["state"])
        wf.payments_sent[wf_state] = wf.sent(wf_state) + amount


def _apply_burn_and_release(state: State, tick: int, payload: dict) -> None:
    amount = payload["amount"]
    holder = state.accounts[payload["holder"]]
    link = state.links[payload["credit_code"]]
    holder.balances[DaoId.OPERATORS] = holder.balance(DaoId.OPERATORS) - amount
    state.pool(DaoId.OPERATORS).burned += amount
    state.pool(DaoId.INVESTORS).frozen -= amount
    link.frozen_amount -= amount
    link.operator_amount -= amount
    if link.frozen_amount == 0 and link.operator_amount == 0:
        link.status = LinkStatus.RELEASED


def _apply_redeem_claim(state: State, tick: int, payload: dict) -> None:
    # Analysis marker only; claims are evaluated offline by the fraud module.
    return


def _apply_credit_matured(state: State, tick: int, payload: dict) -> None:
    state.credits[payload["credit_code"]].state = CreditState.MATURED


def _apply_credit_sold(state: State, tick: int, payload: dict) -> None:
    code = payload["credit_code"]
    credit = state.credits[code]
    link = state.links[code]
    released = payload["released"]
    profit = payload["profit"]

    state.pool(DaoId.INVESTORS).frozen -= released
    link.frozen_amount -= released
    link.status = LinkStatus.RELEASED
    credit.state = CreditState.SOLD
    credit.sale_price = payload["sale_price"]

    if profit > 0:
        fi = state.accounts[state.params["fi"]]
        fi.balances[DaoId.INVESTORS] = fi.balance(DaoId.INVESTORS) + profit
        state.pool(DaoId.INVESTORS).minted += profit


def _apply_fund_closed(state: State, tick: int, payload: dict) -> None:
    fi = state.accounts[state.params["fi"]]
    investors = state.pool(DaoId.INVESTORS)
    for investor_id in sorted(payload["payouts"]):
        payout = payload["payouts"][investor_id]
        earning = payload["earnings"].get(investor_id, 0)
        account = state.accounts[investor_id]
        # Distribute the minted profit, then redeem the full position.
        fi.balances[DaoId.INVESTORS] = fi.balance(DaoId.INVESTORS) - earning
        account.balances[DaoId.INVESTORS] = account.balance(DaoId.INVESTORS) + earning
        account.balances[DaoId.INVESTORS] = account.balance(DaoId.INVESTORS) - payout
        investors.burned += payout
        state.payouts[investor_id] = payout
    state.fund_open = False


def _apply_workflow_opened(state: State, tick: int, payload: dict) -> None:
    record = WorkflowRecord(
        id=payload["id"],
        client=payload["client"],
        gc=payload["gc"],
        engineer=payload["engineer"],
        accountant=payload["accountant"],
        wallet=payload["wallet"],
        total_value=payload["total_value"],
        opened_tick=tick,
    )
    record.state_entered_at[WorkflowState.OPEN] = tick
    record.schedule = {
        WorkflowState(s): amount for s, amount in payload["schedule"].items()
    }
    record.projected = {
        WorkflowState(s): t for s, t in payload["projected"].items()
    }
    state.workflows[payload["id"]] = record
    for point in payload["forecast_points"]:
        period = point["tick"] // int(state.params.get("c2_period_ticks", 30))
        state.forecast[period] = state.forecast.get(period, 0) + point["amount"]


def _apply_anticipation_recorded(state: State, tick: int, payload: dict) -> None:
    wf = state.workflows[payload["workflow"]]
    target = WorkflowState(payload["state"])
    wf.payments_received[target] = wf.received(target) + payload["amount"]


def _apply_asseveration_recorded(state: State, tick: int, payload: dict) -> None:
    wf = state.workflows[payload["workflow"]]
    wf.asseverations.append(
        Asseveration(
            workflow=payload["workflow"],
            state=WorkflowState(payload["state"]),
            kind=AsseverationKind(payload["kind"]),
            signer=payload["signer"],
            tick=tick,
        )
    )


def _apply_workflow_advanced(state: State, tick: int, payload: dict) -> None:
    wf = state.workflows[payload["workflow"]]
    target = WorkflowState(payload["to"])
    wf.state = target
    wf.state_entered_at[target] = tick


def _apply_warning(state: State, tick: int, payload: dict) -> None:
    return


def _apply_run_end(state: State, tick: int, payload: dict) -> None:
    state.run_status = payload["status"]


_HANDLERS = {
    ev.GENESIS: _apply_genesis,
    ev.ACCOUNT_CREATED: _apply_account_created,
    ev.INVESTOR_DEPOSIT: _apply_investor_deposit,
    ev.FREEZE_AND_MINT: _apply_freeze_and_mint,
    ev.TRANSFER: _apply_transfer,
    ev.BURN_AND_RELEASE: _apply_burn_and_release,
    ev.REDEEM_CLAIM: _apply_redeem_claim,
    ev.CREDIT_MATURED: _apply_credit_matured,
    ev.CREDIT_SOLD: _apply_credit_sold,
    ev.FUND_CLOSED: _apply_fund_closed,
    ev.WORKFLOW_OPENED: _apply_workflow_opened,
    ev.ANTICIPATION_RECORDED: _apply_anticipation_recorded,
    ev.ASSEVERATION_RECORDED: _apply_asseveration_recorded,
    ev.WORKFLOW_ADVANCED: _apply_workflow_advanced,
    ev.WARNING: _apply_warning,
    ev.RUN_END: _apply_run_end,
}


def apply_event(state: State, core: dict) -> None:
    """Apply one event body {seq, tick, kind, actor, payload} to the state."""
    kind = core["kind"]
    handler = _HANDLERS.get(kind)
    if handler is None:
        raise IntegrityError(f"unknown event kind: {kind}")
    tick = core["tick"]
    handler(state, tick, core["payload"])
    state.tick = tick
