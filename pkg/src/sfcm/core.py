"""Domain types and the replayable system state.

All token amounts are integer units (one token per euro / minor unit). Rates
and fractions are applied through `Fraction` so floor arithmetic is exact and
conservation checks never see rounding drift.

`State` is the single mutable container shared by the ledger, the workflow
engine and the constraint checkers. It is only ever modified through
`transitions.apply_event`, which makes a live run and a log replay follow the
exact same code path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction


class DaoId(str, Enum):
    INVESTORS = "Investors"
    OPERATORS = "Operators"


class Role(str, Enum):
    INVESTOR = "Investor"
    CUSTOMER = "Customer"
    FINANCIAL_INSTITUTION = "FinancialInstitution"
    GENERAL_CONTRACTOR = "GeneralContractor"
    SUB_CONTRACTOR = "SubContractor"
    SUPPLIER = "Supplier"
    DESIGN_ARCHITECT = "DesignArchitect"
    TAX_AUDITOR = "TaxAuditor"


# DAO membership per role. Investors only ever hold investor-DAO tokens,
# everybody else participates in the operator marketplace. The financial
# institution and customers sit in both pools.
OPERATOR_ROLES = frozenset(
    {
        Role.CUSTOMER,
        Role.FINANCIAL_INSTITUTION,
        Role.GENERAL_CONTRACTOR,
        Role.SUB_CONTRACTOR,
        Role.SUPPLIER,
        Role.DESIGN_ARCHITECT,
        Role.TAX_AUDITOR,
    }
)
INVESTOR_DAO_ROLES = frozenset(
    {Role.INVESTOR, Role.FINANCIAL_INSTITUTION, Role.CUSTOMER}
)


class WorkflowState(str, Enum):
    OPEN = "Open"
    ANTICIPATION = "Anticipation"
    SAL1 = "Sal1"
    SAL2 = "Sal2"
    EOW = "Eow"
    ARCHIVED = "Archived"


STATE_ORDER: tuple[WorkflowState, ...] = tuple(WorkflowState)
_STATE_INDEX = {s: i for i, s in enumerate(STATE_ORDER)}

# States that carry a payment schedule entry (everything after Open).
PAYING_STATES: tuple[WorkflowState, ...] = STATE_ORDER[1:]

# WPS accounting stages in schedule order.
WPS_STATES: tuple[WorkflowState, ...] = (
    WorkflowState.SAL1,
    WorkflowState.SAL2,
    WorkflowState.EOW,
)


def state_index(state: WorkflowState) -> int:
    return _STATE_INDEX[state]


def next_state(state: WorkflowState) -> WorkflowState | None:
    i = _STATE_INDEX[state]
    return STATE_ORDER[i + 1] if i + 1 < len(STATE_ORDER) else None


class LinkStatus(str, Enum):
    ACTIVE = "Active"
    RELEASED = "Released"


class CreditState(str, Enum):
    ACCRUING = "Accruing"
    MATURED = "Matured"
    SOLD = "Sold"


class AsseverationKind(str, Enum):
    TECHNICAL = "Technical"
    FINANCIAL = "Financial"


def as_fraction(rate: float | int | str | Fraction) -> Fraction:
    """Exact fraction for a decimal-looking rate (0.9 becomes 9/10)."""
    if isinstance(rate, Fraction):
        return rate
    return Fraction(str(rate))


def floor_ratio(rate: float | int | str | Fraction, amount: int) -> int:
    """floor(rate * amount) computed exactly."""
    return math.floor(as_fraction(rate) * amount)


def ceil_div_ratio(amount: int, rate: float | int | str | Fraction) -> int:
    """Smallest integer n with rate * n >= amount."""
    return math.ceil(Fraction(amount) / as_fraction(rate))


def canonical_json(obj) -> str:
    """Deterministic JSON used for hashing and on-disk artifacts."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class Account:
    id: str
    role: Role
    balances: dict[DaoId, int] = field(default_factory=dict)

    def balance(self, dao: DaoId) -> int:
        return self.balances.get(dao, 0)


@dataclass
class TokenPool:
    """Per-DAO supply counters. `frozen` is only used by the investor pool."""

    dao: DaoId
    minted: int = 0
    burned: int = 0
    frozen: int = 0

    @property
    def outstanding(self) -> int:
        return self.minted - self.burned

    @property
    def free(self) -> int:
        return self.minted - self.burned - self.frozen


@dataclass
class FreezeLink:
    """1:1 coupling between frozen investor tokens and live operator tokens."""

    credit_code: str
    frozen_amount: int
    operator_amount: int
    initial_amount: int
    status: LinkStatus = LinkStatus.ACTIVE


@dataclass
class TaxCredit:
    credit_code: str
    spend_amount: int
    face_value: int
    state: CreditState = CreditState.ACCRUING
    sale_price: int | None = None
    workflow: str | None = None


@dataclass
class Asseveration:
    workflow: str
    state: WorkflowState
    kind: AsseverationKind
    signer: str
    tick: int


@dataclass
class WorkflowRecord:
    """One paperwork instance with its staged payment schedule."""

    id: str
    client: str
    gc: str
    engineer: str
    accountant: str
    wallet: str
    total_value: int
    opened_tick: int
    state: WorkflowState = WorkflowState.OPEN
    state_entered_at: dict[WorkflowState, int] = field(default_factory=dict)
    payments_received: dict[WorkflowState, int] = field(default_factory=dict)
    payments_sent: dict[WorkflowState, int] = field(default_factory=dict)
    asseverations: list[Asseveration] = field(default_factory=list)
    # Incremental anticipation due on entry into each state.
    schedule: dict[WorkflowState, int] = field(default_factory=dict)
    # Projected tick at which each WPS stage should be reached.
    projected: dict[WorkflowState, int] = field(default_factory=dict)
    credit_code: str | None = None

    def received(self, state: WorkflowState) -> int:
        return self.payments_received.get(state, 0)

    def sent(self, state: WorkflowState) -> int:
        return self.payments_sent.get(state, 0)

    def has_asseveration(self, state: WorkflowState, kind: AsseverationKind) -> bool:
        return any(a.state == state and a.kind == kind for a in self.asseverations)


@dataclass
class State:
    """Full system state, reconstructible from the event log alone."""

    tick: int = 0
    run_status: str | None = None
    fund_open: bool = True
    params: dict = field(default_factory=dict)
    accounts: dict[str, Account] = field(default_factory=dict)
    pools: dict[DaoId, TokenPool] = field(default_factory=dict)
    links: dict[str, FreezeLink] = field(default_factory=dict)
    credits: dict[str, TaxCredit] = field(default_factory=dict)
    shares: dict[str, int] = field(default_factory=dict)
    payouts: dict[str, int] = field(default_factory=dict)
    workflows: dict[str, WorkflowRecord] = field(default_factory=dict)
    # Constraint-2 bookkeeping, all keyed by period index.
    demand: dict[int, int] = field(default_factory=dict)
    forecast: dict[int, int] = field(default_factory=dict)
    period_supply: dict[int, int] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "State":
        state = cls()
        state.pools = {
            DaoId.INVESTORS: TokenPool(DaoId.INVESTORS),
            DaoId.OPERATORS: TokenPool(DaoId.OPERATORS),
        }
        return state

    def pool(self, dao: DaoId) -> TokenPool:
        return self.pools[dao]

    def account(self, account_id: str) -> Account:
        return self.accounts[account_id]

    def snapshot_dict(self) -> dict:
        """Plain-data view of the state, safe to share and hash.

        Workflow state is emitted as a one-hot flag list so offline checkers
        can validate the encoding itself.
        """
        return {
            "tick": self.tick,
            "status": self.run_status,
            "fund_open": self.fund_open,
            "params": dict(self.params),
            "accounts": {
                aid: {
                    "role": acc.role.value,
                    "balances": {d.value: acc.balance(d) for d in DaoId},
                }
                for aid, acc in self.accounts.items()
            },
            "pools": {
                dao.value: {
                    "minted": pool.minted,
                    "burned": pool.burned,
                    "frozen": pool.frozen,
                }
                for dao, pool in self.pools.items()
            },
            "links": {
                code: {
                    "frozen": link.frozen_amount,
                    "operator": link.operator_amount,
                    "initial": link.initial_amount,
                    "status": link.status.value,
                }
                for code, link in self.links.items()
            },
            "credits": {
                code: {
                    "spend": credit.spend_amount,
                    "face": credit.face_value,
                    "state": credit.state.value,
                    "sale_price": credit.sale_price,
                    "workflow": credit.workflow,
                }
                for code, credit in self.credits.items()
            },
            "shares": dict(self.shares),
            "payouts": dict(self.payouts),
            "workflows": {
                wid: {
                    "client": wf.client,
                    "gc": wf.gc,
                    "engineer": wf.engineer,
                    "accountant": wf.accountant,
                    "wallet": wf.wallet,
                    "total_value": wf.total_value,
                    "opened": wf.opened_tick,
                    "state": wf.state.value,
                    "state_flags": [wf.state.value],
                    "entered": {s.value: t for s, t in wf.state_entered_at.items()},
                    "received": {s.value: v for s, v in wf.payments_received.items()},
                    "sent": {s.value: v for s, v in wf.payments_sent.items()},
                    "asseverations": [
                        {
                            "state": a.state.value,
                            "kind": a.kind.value,
                            "signer": a.signer,
                            "tick": a.tick,
                        }
                        for a in wf.asseverations
                    ],
                    "schedule": {s.value: v for s, v in wf.schedule.items()},
                    "projected": {s.value: t for s, t in wf.projected.items()},
                    "credit_code": wf.credit_code,
                }
                for wid, wf in self.workflows.items()
            },
            "c2": {
                "demand": {str(p): v for p, v in self.demand.items()},
                "forecast": {str(p): v for p, v in self.forecast.items()},
                "period_supply": {str(p): v for p, v in self.period_supply.items()},
            },
        }
