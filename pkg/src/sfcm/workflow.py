"""Six-state paperwork automaton with its staged payment schedule.

Each record moves Open -> Anticipation -> Sal1 -> Sal2 -> Eow -> Archived.
Entering a state requires the previous state to be fully asseverated
(technical and financial) and the incremental anticipation for the target
state to be paid in full by the general contractor into the workflow wallet.

Stage amounts are floors of the cumulative schedule, so the running total
paid by any state equals floor(cumulative fraction * total value) exactly and
the whole value is paid out by end of works.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import events as ev
from .constraints import ConstraintId, ForecastPoint, ForecastSeries
from .core import (
    AsseverationKind,
    CreditState,
    Role,
    WorkflowRecord,
    WorkflowState,
    WPS_STATES,
    as_fraction,
    next_state,
    state_index,
)
from .errors import (
    ConstraintError,
    DuplicateError,
    RoleError,
    SequenceError,
    StateError,
    ValidationError,
)
from .ledger import CreditLedger


def cumulative_schedule(
    total_value: int,
    anticipation_fraction: Fraction,
    wps_fractions: list[Fraction],
) -> dict[WorkflowState, int]:
    """Incremental anticipation due on entry into each paying state."""
    cumulative = {
        WorkflowState.OPEN: Fraction(0),
        WorkflowState.ANTICIPATION: anticipation_fraction,
        WorkflowState.SAL1: wps_fractions[0],
        WorkflowState.SAL2: wps_fractions[1],
        WorkflowState.EOW: wps_fractions[2],
        WorkflowState.ARCHIVED: wps_fractions[2],
    }
    floors = {s: math.floor(f * total_value) for s, f in cumulative.items()}
    schedule: dict[WorkflowState, int] = {}
    previous = WorkflowState.OPEN
    for state in list(WorkflowState)[1:]:
        schedule[state] = floors[state] - floors[previous]
        previous = state
    return schedule


def wps_projection(
    total_value: int,
    wps_fractions: list[Fraction],
    opened_tick: int,
    duration_ticks: int,
) -> list[tuple[WorkflowState, int, int]]:
    """(stage, projected tick, incremental amount) for each WPS stage.

    Stage i is projected to complete at its cumulative fraction of the site
    duration; amounts are the increments between cumulative WPS milestones.
    """
    points = []
    previous = Fraction(0)
    for stage, fraction in zip(WPS_STATES, wps_fractions):
        tick = opened_tick + math.floor(fraction * duration_ticks)
        amount = math.floor(fraction * total_value) - math.floor(previous * total_value)
        points.append((stage, tick, amount))
        previous = fraction
    return points


class WorkflowEngine:
    """Workflow operations layered over the shared ledger and event log."""

    def __init__(self, ledger: CreditLedger):
        self.ledger = ledger

    @property
    def state(self):
        return self.ledger.state

    def _params(self) -> dict:
        return self.ledger.state.params

    def _record(self, workflow_id: str) -> WorkflowRecord:
        record = self.state.workflows.get(workflow_id)
        if record is None:
            raise ValidationError(f"unknown workflow {workflow_id!r}")
        return record

    # ------------------------------------------------------------------
    # opening
    # ------------------------------------------------------------------

    def open_workflow(
        self,
        client: str,
        gc: str,
        engineer: str,
        accountant: str,
        total_value: int,
        workflow_id: str | None = None,
    ) -> WorkflowRecord:
        if total_value <= 0:
            raise ValidationError("total value must be positive")
        roles = {
            client: Role.CUSTOMER,
            gc: Role.GENERAL_CONTRACTOR,
            engineer: Role.DESIGN_ARCHITECT,
            accountant: Role.TAX_AUDITOR,
        }
        for account_id, expected in roles.items():
            account = self.state.accounts.get(account_id)
            if account is None:
                raise ValidationError(f"unknown account {account_id!r}")
            if account.role is not expected:
                raise RoleError(
                    f"{account_id} has role {account.role.value}, expected {expected.value}"
                )
        if engineer == accountant:
            raise ValidationError("engineer and accountant must be distinct")

        active_for_client = sum(
            1
            for wf in self.state.workflows.values()
            if wf.client == client and wf.state is not WorkflowState.ARCHIVED
        )
        if active_for_client >= 2:
            raise ConstraintError(
                ConstraintId.C4,
                f"client {client} already holds {active_for_client} open workflows",
            )
        committed = sum(
            wf.total_value
            for wf in self.state.workflows.values()
            if wf.gc == gc and wf.state is not WorkflowState.ARCHIVED
        )
        cap = int(self._params()["soa_cap"])
        if committed + total_value > cap:
            raise ConstraintError(
                ConstraintId.C6,
                f"contractor {gc} would hold {committed + total_value} over SOA cap {cap}",
            )

        if workflow_id is None:
            workflow_id = f"wf-{len(self.state.workflows) + 1:02d}"
        if workflow_id in self.state.workflows:
            raise ValidationError(f"workflow {workflow_id!r} already exists")
        wallet = f"{workflow_id}:wallet"
        self.ledger.create_account(wallet, Role.CUSTOMER, actor=client)

        params = self._params()
        wps_fractions = [as_fraction(f) for f in params["wps_fractions"]]
        schedule = cumulative_schedule(
            total_value, as_fraction(params["anticipation_fraction"]), wps_fractions
        )
        duration = int(params["duration_ticks"])
        points = wps_projection(total_value, wps_fractions, self.ledger.tick, duration)
        self.ledger._commit(
            ev.WORKFLOW_OPENED,
            client,
            {
                "id": workflow_id,
                "client": client,
                "gc": gc,
                "engineer": engineer,
                "accountant": accountant,
                "wallet": wallet,
                "total_value": total_value,
                "schedule": {s.value: amount for s, amount in schedule.items()},
                "projected": {s.value: tick for s, tick, _ in points},
                "forecast_points": [
                    {"state": s.value, "tick": tick, "amount": amount}
                    for s, tick, amount in points
                ],
            },
        )
        return self.state.workflows[workflow_id]

    # ------------------------------------------------------------------
    # payments and certifications
    # ------------------------------------------------------------------

    def required_anticipation(self, workflow_id: str, target: WorkflowState) -> int:
        return self._record(workflow_id).schedule.get(target, 0)

    def record_anticipation(
        self, workflow_id: str, target_state: WorkflowState, amount: int
    ) -> WorkflowRecord:
        """Book the contractor's advance for the next state.

        The transfer from the contractor wallet to the workflow wallet goes
        through the ledger; the booked amount must equal the incremental
        schedule share of the target state exactly.
        """
        record = self._record(workflow_id)
        expected_target = next_state(record.state)
        if target_state is WorkflowState.ARCHIVED or record.state is WorkflowState.ARCHIVED:
            raise SequenceError("archiving carries no anticipation")
        if target_state is not expected_target:
            raise SequenceError(
                f"workflow {workflow_id} is at {record.state.value}, "
                f"next anticipation is for {expected_target.value}"
            )
        required = record.schedule.get(target_state, 0)
        if required <= 0:
            raise ValidationError(f"no anticipation due for {target_state.value}")
        if amount != required:
            raise ValidationError(
                f"anticipation for {target_state.value} must be {required}, got {amount}"
            )
        if record.received(target_state) > 0:
            raise ValidationError(f"{target_state.value} anticipation already paid")
        self.ledger.transfer_operator(
            record.gc,
            record.wallet,
            amount,
            invoice_ref=f"ant:{workflow_id}:{target_state.value}",
        )
        self.ledger._commit(
            ev.ANTICIPATION_RECORDED,
            record.gc,
            {"workflow": workflow_id, "state": target_state.value, "amount": amount},
        )
        return record

    def record_asseveration(
        self,
        workflow_id: str,
        state: WorkflowState,
        kind: AsseverationKind,
        signer: str,
    ) -> WorkflowRecord:
        """Store a sworn certification and pay the signing technician."""
        record = self._record(workflow_id)
        if record.state is WorkflowState.ARCHIVED:
            raise StateError(f"workflow {workflow_id} is archived")
        if state is not record.state:
            raise StateError(
                f"asseverations apply to the current state {record.state.value}"
            )
        expected = (
            record.engineer if kind is AsseverationKind.TECHNICAL else record.accountant
        )
        if signer != expected:
            raise RoleError(
                f"{kind.value} asseveration for {workflow_id} must be signed by {expected}"
            )
        if record.has_asseveration(state, kind):
            raise DuplicateError(
                f"{kind.value} asseveration already recorded for {state.value}"
            )
        self.ledger._commit(
            ev.ASSEVERATION_RECORDED,
            signer,
            {
                "workflow": workflow_id,
                "state": state.value,
                "kind": kind.value,
                "signer": signer,
            },
        )
        self._pay_technician(record, state, kind, signer)
        self._mature_if_complete(record)
        return record

    def _pay_technician(
        self,
        record: WorkflowRecord,
        state: WorkflowState,
        kind: AsseverationKind,
        signer: str,
    ) -> None:
        params = self._params()
        pct_key = (
            "engineer_payment_pct"
            if kind is AsseverationKind.TECHNICAL
            else "accountant_payment_pct"
        )
        stage_value = record.schedule.get(state, 0)
        fee = math.floor(as_fraction(params[pct_key]) * stage_value)
        if fee > 0:
            self.ledger.transfer_operator(
                record.wallet,
                signer,
                fee,
                invoice_ref=f"fee:{record.id}:{state.value}:{kind.value}",
                workflow_spend=(record.id, state),
            )

    def _mature_if_complete(self, record: WorkflowRecord) -> None:
        """End-of-works credits mature once both final asseverations are in."""
        if record.state is not WorkflowState.EOW or record.credit_code is None:
            return
        credit = self.state.credits.get(record.credit_code)
        if credit is None or credit.state is not CreditState.ACCRUING:
            return
        if all(
            record.has_asseveration(WorkflowState.EOW, kind) for kind in AsseverationKind
        ):
            self.ledger.mature_credit(record.credit_code, issuer=self.ledger.fi)

    # ------------------------------------------------------------------
    # advancement
    # ------------------------------------------------------------------

    @staticmethod
    def advance_ready(record: WorkflowRecord) -> bool:
        """The transition rule: certified current state plus paid next state."""
        if record.state is WorkflowState.ARCHIVED:
            return False
        target = next_state(record.state)
        certified = all(
            record.has_asseveration(record.state, kind) for kind in AsseverationKind
        )
        paid = record.received(target) == record.schedule.get(target, 0)
        return certified and paid

    def try_advance(self, workflow_id: str) -> bool:
        """Advance one state when the gate conditions hold, else report False."""
        record = self._record(workflow_id)
        if not self.advance_ready(record):
            return False
        target = next_state(record.state)
        self.ledger._commit(
            ev.WORKFLOW_ADVANCED,
            workflow_id,
            {
                "workflow": workflow_id,
                "from": record.state.value,
                "to": target.value,
            },
        )
        if target is WorkflowState.ARCHIVED:
            self._mature_on_archive(record)
        return True

    def _mature_on_archive(self, record: WorkflowRecord) -> None:
        if record.credit_code is None:
            return
        credit = self.state.credits.get(record.credit_code)
        if credit is not None and credit.state is CreditState.ACCRUING:
            self.ledger.mature_credit(record.credit_code, issuer=self.ledger.fi)

    # ------------------------------------------------------------------
    # forecasting
    # ------------------------------------------------------------------

    def project_schedule(
        self, workflow_id: str, duration_profile: str | int | None = None
    ) -> ForecastSeries:
        """Token demand forecast for the remaining WPS stages.

        Stage i is projected at its cumulative fraction of the profile
        duration, measured from the opening tick.
        """
        record = self._record(workflow_id)
        if record.state is WorkflowState.ARCHIVED:
            raise StateError(f"workflow {workflow_id} is archived")
        params = self._params()
        if duration_profile is None:
            duration = int(params["duration_ticks"])
        elif isinstance(duration_profile, str):
            from .config import DURATION_PROFILES

            if duration_profile not in DURATION_PROFILES:
                raise ValidationError(f"unknown duration profile {duration_profile!r}")
            duration = DURATION_PROFILES[duration_profile] * int(params["ticks_per_month"])
        else:
            if duration_profile <= 0:
                raise ValidationError("duration must be positive")
            duration = int(duration_profile)
        wps_fractions = [as_fraction(f) for f in params["wps_fractions"]]
        points = wps_projection(
            record.total_value, wps_fractions, record.opened_tick, duration
        )
        remaining = [
            ForecastPoint(state=s.value, tick=tick, amount=amount)
            for s, tick, amount in points
            if state_index(s) > state_index(record.state)
        ]
        return ForecastSeries(points=tuple(remaining))
