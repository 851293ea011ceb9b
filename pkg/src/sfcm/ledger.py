"""Dual-DAO token ledger: mint, freeze, transfer, burn, release, sale, payout.

Design notes
    - Single writer. All mutations are serialized through `_commit`, which
      applies the transition, hashes the post-state into the event chain and
      re-checks the accounting invariants. Snapshots returned by
      `snapshot()` are plain data and safe to share across threads.
    - Lifecycle operations (mint, freeze, burn, release, maturation, sale,
      fund closing) must be issued by the financial institution account, the
      guarantor of the system. Peer transfers inside the operator DAO are
      not gated.
    - Integer token units throughout; one token per unit of fiat. Rates are
      applied with exact fraction floor arithmetic.

Invariants re-checked after every operation:
    - per DAO, sum of balances equals minted - burned and no balance is
      negative;
    - investor-pool frozen equals the sum of frozen amounts over active
      links and never exceeds outstanding supply;
    - operator-pool outstanding equals the sum of operator amounts over all
      links (sold links keep their unredeemed remainder, which is backed by
      sale proceeds rather than frozen tokens);
    - active links stay balanced, frozen == operator outstanding.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import events as ev
from .config import ScenarioConfig
from .constraints import ConstraintId
from .core import (
    AsseverationKind,
    CreditState,
    DaoId,
    FreezeLink,
    LinkStatus,
    OPERATOR_ROLES,
    Role,
    State,
    WorkflowState,
    as_fraction,
    floor_ratio,
    state_index,
)
from .errors import (
    ConstraintError,
    CoverageError,
    FundClosedError,
    FundOpenError,
    InsufficientBalanceError,
    IntegrityError,
    LinkError,
    MaturityError,
    RoleError,
    ValidationError,
)
from .events import Event, EventLog, chain_hash, snapshot_digest
from .transitions import apply_event


def split_largest_remainder(total: int, weights: dict[str, int]) -> dict[str, int]:
    """Split `total` proportionally to integer weights without drift.

    Each share is the floor of the exact rational entitlement; leftover units
    go to the largest fractional remainders, ties broken by ascending key.
    The results always sum to `total` and each differs from the exact share
    by strictly less than one unit.
    """
    if not weights:
        return {}
    weight_sum = sum(weights.values())
    if weight_sum <= 0:
        if total != 0:
            raise ValidationError("cannot split a non-zero total over zero weight")
        return {k: 0 for k in weights}
    exact = {k: Fraction(total * w, weight_sum) for k, w in weights.items()}
    shares = {k: math.floor(x) for k, x in exact.items()}
    leftover = total - sum(shares.values())
    by_remainder = sorted(weights, key=lambda k: (-(exact[k] - shares[k]), k))
    for k in by_remainder[:leftover]:
        shares[k] += 1
    return shares


class CreditLedger:
    """Event-sourced ledger for the investor and operator token pools."""

    def __init__(self, params: dict | None = None, fi_id: str = "fi"):
        if params is None:
            params = ScenarioConfig().genesis_params(fi_id)
        self.state = State.empty()
        self.log = EventLog()
        self._tick = 0
        self._prev_hash = ev.GENESIS_PREV_HASH
        self.fi = params.get("fi", fi_id)
        self._commit(ev.GENESIS, "system", {"params": params})
        self._commit(
            ev.ACCOUNT_CREATED,
            "system",
            {"id": self.fi, "role": Role.FINANCIAL_INSTITUTION.value},
        )

    # ------------------------------------------------------------------
    # clock and plumbing
    # ------------------------------------------------------------------

    @property
    def tick(self) -> int:
        return self._tick

    def set_tick(self, tick: int) -> None:
        if tick < self._tick:
            raise ValidationError(f"clock cannot move backwards ({tick} < {self._tick})")
        self._tick = tick

    def param_fraction(self, name: str) -> Fraction:
        return as_fraction(self.state.params[name])

    def snapshot(self) -> dict:
        return self.state.snapshot_dict()

    def _commit(self, kind: str, actor: str, payload: dict) -> Event:
        core = {
            "seq": len(self.log),
            "tick": self._tick,
            "kind": kind,
            "actor": actor,
            "payload": payload,
        }
        apply_event(self.state, core)
        digest = snapshot_digest(self.state)
        event = Event(
            seq=core["seq"],
            tick=core["tick"],
            kind=kind,
            actor=actor,
            payload=payload,
            state_hash=chain_hash(self._prev_hash, core, digest),
        )
        self.log.append(event)
        self._prev_hash = event.state_hash
        self.verify_invariants()
        return event

    def _require_fi(self, issuer: str, op: str) -> None:
        if issuer != self.fi:
            raise RoleError(
                f"{op} must be issued by the financial institution ({self.fi}), got {issuer!r}"
            )

    def _account(self, account_id: str):
        account = self.state.accounts.get(account_id)
        if account is None:
            raise ValidationError(f"unknown account {account_id!r}")
        return account

    # ------------------------------------------------------------------
    # accounts
    # ------------------------------------------------------------------

    def create_account(self, account_id: str, role: Role, actor: str = "system") -> None:
        if account_id in self.state.accounts:
            raise ValidationError(f"account {account_id!r} already exists")
        self._commit(ev.ACCOUNT_CREATED, actor, {"id": account_id, "role": role.value})

    # ------------------------------------------------------------------
    # investor side
    # ------------------------------------------------------------------

    def mint_investor(self, account_id: str, amount: int, issuer: str) -> None:
        """Deposit fiat and mint investor tokens one to one."""
        self._require_fi(issuer, "mint_investor")
        account = self._account(account_id)
        if account.role is not Role.INVESTOR:
            raise RoleError(f"{account_id} has role {account.role.value}, not Investor")
        if not self.state.fund_open:
            raise FundClosedError("the fund is closed to new deposits")
        if amount <= 0:
            raise ValidationError(f"deposit must be positive, got {amount}")
        self._commit(
            ev.INVESTOR_DEPOSIT, issuer, {"investor": account_id, "amount": amount}
        )

    def freeze_and_mint(
        self,
        gc: str,
        requested_work_value: int,
        discount_rate: float | str | Fraction | None = None,
        issuer: str | None = None,
        workflow: str | None = None,
    ) -> FreezeLink:
        """Freeze investor tokens and mint the discounted operator amount.

        The frozen amount equals floor(discount_rate * requested value) and a
        tax credit accrues on the full requested value at the configured
        accrual factor, coupled to the new link by a fresh credit code.
        """
        if issuer is None:
            raise RoleError("freeze_and_mint requires an issuer")
        self._require_fi(issuer, "freeze_and_mint")
        account = self._account(gc)
        if account.role is not Role.GENERAL_CONTRACTOR:
            raise RoleError(f"{gc} has role {account.role.value}, not GeneralContractor")
        if requested_work_value <= 0:
            raise ValidationError("requested work value must be positive")
        rate = (
            as_fraction(discount_rate)
            if discount_rate is not None
            else self.param_fraction("discount_rate")
        )
        if not 0 < rate <= 1:
            raise ValidationError(f"discount rate must be in (0, 1], got {rate}")
        frozen = math.floor(rate * requested_work_value)
        if frozen <= 0:
            raise ValidationError("request too small to mint any operator token")

        investors = self.state.pool(DaoId.INVESTORS)
        if frozen > investors.free:
            raise CoverageError(
                f"free investor supply {investors.free} cannot back {frozen} operator tokens"
            )
        self._check_c2_inline(frozen)

        if workflow is not None:
            record = self.state.workflows.get(workflow)
            if record is None:
                raise ValidationError(f"unknown workflow {workflow!r}")
            if record.credit_code is not None:
                raise ValidationError(f"workflow {workflow!r} is already funded")

        face_value = floor_ratio(
            self.param_fraction("accrual_factor"), requested_work_value
        )
        code = f"cr-{len(self.state.credits) + 1:04d}"
        self._commit(
            ev.FREEZE_AND_MINT,
            issuer,
            {
                "gc": gc,
                "requested": requested_work_value,
                "rate": str(rate),
                "frozen": frozen,
                "credit_code": code,
                "spend": requested_work_value,
                "face_value": face_value,
                "workflow": workflow,
            },
        )
        return self.state.links[code]

    def _check_c2_inline(self, frozen: int) -> None:
        """Demand this period must stay within the previous period's forecast.

        When no forecast was registered the free supply observed at the first
        request of the period bounds demand instead, so a freshly funded pool
        is usable in its first period.
        """
        period = self._tick // int(self.state.params.get("c2_period_ticks", 30))
        investors = self.state.pool(DaoId.INVESTORS)
        baseline = self.state.period_supply.get(period, investors.free)
        allowed = self.state.forecast.get(period - 1, baseline)
        demand = self.state.demand.get(period, 0) + frozen
        if demand > allowed:
            raise ConstraintError(
                ConstraintId.C2,
                f"period {period} demand {demand} exceeds forecast {allowed}",
            )

    # ------------------------------------------------------------------
    # operator side
    # ------------------------------------------------------------------

    def transfer_operator(
        self,
        src: str,
        dst: str,
        amount: int,
        invoice_ref: str,
        workflow_spend: tuple[str, WorkflowState] | None = None,
    ) -> None:
        """Move operator tokens between two operator-DAO accounts.

        A transfer of zero is a no-op and appends no event. When
        `workflow_spend` names the paying workflow and state, the transfer is
        validated against constraint 3 and booked as that state's outgoing
        payment.
        """
        source = self._account(src)
        dest = self._account(dst)
        for account in (source, dest):
            if account.role not in OPERATOR_ROLES:
                raise RoleError(f"{account.id} ({account.role.value}) is not in the operator DAO")
        if amount < 0:
            raise ValidationError(f"transfer amount must be >= 0, got {amount}")
        if amount == 0:
            return
        if source.balance(DaoId.OPERATORS) < amount:
            raise InsufficientBalanceError(
                f"{src} holds {source.balance(DaoId.OPERATORS)}, cannot pay {amount}"
            )
        payload: dict = {"src": src, "dst": dst, "amount": amount, "invoice_ref": invoice_ref}
        if workflow_spend is not None:
            workflow_id, wf_state = workflow_spend
            record = self.state.workflows.get(workflow_id)
            if record is None:
                raise ValidationError(f"unknown workflow {workflow_id!r}")
            if record.sent(wf_state) + amount > record.received(wf_state):
                raise ConstraintError(
                    ConstraintId.C3,
                    f"workflow {workflow_id} would spend "
                    f"{record.sent(wf_state) + amount} of {record.received(wf_state)} "
                    f"allocated for {wf_state.value}",
                )
            payload["workflow"] = workflow_id
            payload["state"] = wf_state.value
        self._commit(ev.TRANSFER, src, payload)

    def burn_and_release(
        self, holder: str, credit_code: str, amount: int, issuer: str
    ) -> None:
        """Redeem operator tokens, releasing the equal frozen investor amount."""
        self._require_fi(issuer, "burn_and_release")
        link = self.state.links.get(credit_code)
        if link is None:
            raise LinkError(f"unknown credit code {credit_code!r}")
        if link.status is not LinkStatus.ACTIVE:
            raise LinkError(f"link {credit_code} is {link.status.value}")
        if amount <= 0:
            raise ValidationError(f"burn amount must be positive, got {amount}")
        if amount > link.operator_amount:
            raise LinkError(
                f"burn {amount} exceeds link remainder {link.operator_amount}"
            )
        account = self._account(holder)
        if account.balance(DaoId.OPERATORS) < amount:
            raise InsufficientBalanceError(
                f"{holder} holds {account.balance(DaoId.OPERATORS)}, cannot redeem {amount}"
            )
        self._commit(
            ev.BURN_AND_RELEASE,
            issuer,
            {"holder": holder, "credit_code": credit_code, "amount": amount},
        )

    def record_redemption_claim(
        self,
        gc: str,
        workflow: str,
        states: tuple[WorkflowState, WorkflowState],
        elapsed: tuple[int, int],
    ) -> None:
        """Append the audit marker for a contractor's stage redemption claim."""
        self._commit(
            ev.REDEEM_CLAIM,
            gc,
            {
                "workflow": workflow,
                "gc": gc,
                "state_a": states[0].value,
                "state_b": states[1].value,
                "elapsed_a": elapsed[0],
                "elapsed_b": elapsed[1],
            },
        )

    # ------------------------------------------------------------------
    # credit lifecycle
    # ------------------------------------------------------------------

    def mature_credit(self, credit_code: str, issuer: str) -> None:
        """Move an accruing credit to Matured.

        Credits coupled to a workflow can only mature once the paperwork has
        reached end of works with both final asseverations on file.
        """
        self._require_fi(issuer, "mature_credit")
        credit = self.state.credits.get(credit_code)
        if credit is None:
            raise ValidationError(f"unknown credit {credit_code!r}")
        if credit.state is not CreditState.ACCRUING:
            raise MaturityError(f"credit {credit_code} is {credit.state.value}")
        if credit.workflow is not None:
            record = self.state.workflows[credit.workflow]
            at_eow = state_index(record.state) >= state_index(WorkflowState.EOW)
            fully_asseverated = all(
                record.has_asseveration(WorkflowState.EOW, kind)
                for kind in AsseverationKind
            )
            if not (at_eow and fully_asseverated):
                raise MaturityError(
                    f"workflow {credit.workflow} has not completed end of works"
                )
        self._commit(ev.CREDIT_MATURED, issuer, {"credit_code": credit_code})

    def sell_credit(self, credit_code: str, sale_price: int, issuer: str) -> dict:
        """Sell a matured credit: release remaining frozen tokens, mint profit.

        Profit is sale price minus the link's original frozen amount and is
        minted into the investor pool, held by the financial institution for
        distribution at fund closing. A sale below the frozen amount is
        recorded as a loss (profit zero, shortfall logged), not refused.
        """
        self._require_fi(issuer, "sell_credit")
        credit = self.state.credits.get(credit_code)
        if credit is None:
            raise ValidationError(f"unknown credit {credit_code!r}")
        if credit.state is not CreditState.MATURED:
            raise MaturityError(
                f"credit {credit_code} is {credit.state.value}, only matured credits sell"
            )
        if sale_price <= 0:
            raise ValidationError(f"sale price must be positive, got {sale_price}")
        link = self.state.links[credit_code]
        profit = max(0, sale_price - link.initial_amount)
        shortfall = max(0, link.initial_amount - sale_price)
        payload = {
            "credit_code": credit_code,
            "sale_price": sale_price,
            "released": link.frozen_amount,
            "profit": profit,
            "shortfall": shortfall,
        }
        self._commit(ev.CREDIT_SOLD, issuer, payload)
        return payload

    def close_fund_and_payout(self, issuer: str) -> dict[str, int]:
        """Close the fund: pay every investor its quota plus earnings, burn all.

        Earnings split the pool growth exactly, proportionally to the fixed
        quotas, using largest-remainder rounding with ties broken by
        ascending account id.
        """
        self._require_fi(issuer, "close_fund_and_payout")
        if not self.state.fund_open:
            raise FundClosedError("fund already closed")
        active = [c for c, l in self.state.links.items() if l.status is LinkStatus.ACTIVE]
        if active:
            raise FundOpenError(f"active freeze links remain: {sorted(active)}")
        unsold = [
            c for c, credit in self.state.credits.items()
            if credit.state is not CreditState.SOLD
        ]
        if unsold:
            raise FundOpenError(f"credits not yet sold or written off: {sorted(unsold)}")

        t_start = sum(self.state.shares.values())
        t_end = self.state.pool(DaoId.INVESTORS).outstanding
        growth = t_end - t_start
        if growth < 0:
            raise IntegrityError(f"investor pool shrank below quotas ({t_end} < {t_start})")
        earnings = split_largest_remainder(growth, dict(self.state.shares))
        payouts = {
            investor: quota + earnings.get(investor, 0)
            for investor, quota in self.state.shares.items()
        }
        self._commit(
            ev.FUND_CLOSED,
            issuer,
            {
                "t_start": t_start,
                "t_end": t_end,
                "payouts": payouts,
                "earnings": earnings,
            },
        )
        return payouts

    # ------------------------------------------------------------------
    # scheduler helpers
    # ------------------------------------------------------------------

    def warn(self, actor: str, operation: str, reason: str) -> None:
        self._commit(ev.WARNING, actor, {"operation": operation, "reason": reason})

    def end_run(self, status: str) -> None:
        self._commit(ev.RUN_END, "scheduler", {"status": status})

    # ------------------------------------------------------------------
    # invariants
    # ------------------------------------------------------------------

    def verify_invariants(self) -> None:
        state = self.state
        for dao in DaoId:
            pool = state.pool(dao)
            if pool.minted < pool.burned:
                raise IntegrityError(f"{dao.value}: burned exceeds minted")
            total = 0
            for account in state.accounts.values():
                balance = account.balance(dao)
                if balance < 0:
                    raise IntegrityError(f"negative balance for {account.id} in {dao.value}")
                total += balance
            if total != pool.outstanding:
                raise IntegrityError(
                    f"{dao.value}: balances {total} != outstanding {pool.outstanding}"
                )
        investors = state.pool(DaoId.INVESTORS)
        active_frozen = 0
        operator_linked = 0
        for link in state.links.values():
            operator_linked += link.operator_amount
            if link.status is LinkStatus.ACTIVE:
                if link.frozen_amount != link.operator_amount or link.frozen_amount < 0:
                    raise IntegrityError(f"link {link.credit_code} unbalanced")
                active_frozen += link.frozen_amount
        if investors.frozen != active_frozen:
            raise IntegrityError(
                f"frozen pool {investors.frozen} != active links {active_frozen}"
            )
        if not 0 <= investors.frozen <= investors.outstanding:
            raise IntegrityError("frozen amount outside [0, outstanding]")
        operators = state.pool(DaoId.OPERATORS)
        if operators.outstanding != operator_linked:
            raise IntegrityError(
                f"operator outstanding {operators.outstanding} != links {operator_linked}"
            )
