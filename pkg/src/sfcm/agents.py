"""Deterministic discrete-event scheduler animating the scenario agents.

One tick is one simulated day. Per tick the scheduler activates agent
categories in a fixed phase order, shuffling activation order inside each
category with the run's random stream:

    1. technician agents   sign pending asseverations (one draw each)
    2. contractor agents   pay pending anticipations (one draw each)
    3. financial agent     no periodic decision (lifecycle issuer only)
    4. workflow agents     advance when their gate conditions hold

Random stream consumption order, which fixes the log byte for byte per
(seed, config): during build, one `uniform_int` per workflow value in id
order; per tick, the category shuffles followed by one `random()` draw per
pending decision, workflows visited in ascending id. An approval draw u
succeeds when u < threshold, so threshold 0 never approves and 1 always
does.

Agent-level operation failures are appended as warning events and never
abort the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import ScenarioConfig
from .core import (
    AsseverationKind,
    CreditState,
    DaoId,
    LinkStatus,
    Role,
    WorkflowState,
    as_fraction,
    ceil_div_ratio,
    floor_ratio,
    next_state,
)
from .errors import InsufficientDataError, SfcmError
from .ledger import CreditLedger
from .rng import SplitMix64
from .workflow import WorkflowEngine

# Claimed state pairs per redemption point: entering Sal2 redeems the works
# paid through Anticipation and Sal1, archiving redeems Sal2 and Eow.
_CLAIM_PAIRS = {
    WorkflowState.SAL2: (WorkflowState.ANTICIPATION, WorkflowState.SAL1),
    WorkflowState.ARCHIVED: (WorkflowState.SAL2, WorkflowState.EOW),
}


@dataclass
class AgentSpec:
    kind: str
    id: str
    account: str
    params: dict = field(default_factory=dict)


@dataclass
class RunResult:
    status: str
    ledger: CreditLedger
    payouts: dict[str, int]

    @property
    def events(self):
        return self.ledger.log.events

    @property
    def lines(self) -> list[str]:
        return self.ledger.log.lines()


class Simulation:
    """A fully built scenario: accounts, agents, funded workflows."""

    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.rng = SplitMix64(config.seed)
        self.ledger = CreditLedger(config.genesis_params())
        self.engine = WorkflowEngine(self.ledger)
        self.agents: list[AgentSpec] = []
        self._technicians: list[AgentSpec] = []
        self._contractors: list[AgentSpec] = []
        self._workflow_agents: list[AgentSpec] = []
        self._build()

    @property
    def state(self):
        return self.ledger.state

    # ------------------------------------------------------------------
    # model construction
    # ------------------------------------------------------------------

    def _build(self) -> None:
        cfg = self.config
        fi = self.ledger.fi
        self.agents.append(AgentSpec("Financial", "financial-01", fi))

        investors = [f"inv-{i + 1:02d}" for i in range(cfg.investor_count)]
        for account in investors:
            self.ledger.create_account(account, Role.INVESTOR)

        contractors = [f"gc-{i + 1:02d}" for i in range(cfg.gc_count)]
        for account in contractors:
            self.ledger.create_account(account, Role.GENERAL_CONTRACTOR)
            spec = AgentSpec("GeneralContractor", account, account)
            self._contractors.append(spec)
            self.agents.append(spec)

        engineer_count = math.ceil(cfg.technician_count / 2)
        engineers = [f"eng-{i + 1:02d}" for i in range(engineer_count)]
        accountants = [
            f"acc-{i + 1:02d}" for i in range(cfg.technician_count - engineer_count)
        ]
        for account in engineers:
            self.ledger.create_account(account, Role.DESIGN_ARCHITECT)
            spec = AgentSpec("Technical", account, account, {"kind": "Technical"})
            self._technicians.append(spec)
            self.agents.append(spec)
        for account in accountants:
            self.ledger.create_account(account, Role.TAX_AUDITOR)
            spec = AgentSpec("Technical", account, account, {"kind": "Financial"})
            self._technicians.append(spec)
            self.agents.append(spec)

        clients = [f"cl-{i + 1:02d}" for i in range(cfg.resolved_client_count())]
        for account in clients:
            self.ledger.create_account(account, Role.CUSTOMER)
            self.agents.append(AgentSpec("Client", account, account))

        if cfg.workflow_count == 0:
            return

        lo, hi = cfg.value_range
        values = [self.rng.uniform_int(lo, hi) for _ in range(cfg.workflow_count)]

        # Deposits must cover every freeze; quotas split the total nearly
        # evenly, the first accounts absorbing the remainder.
        total = sum(values)
        base, extra = divmod(total, len(investors))
        for i, investor in enumerate(investors):
            quota = base + (1 if i < extra else 0)
            if quota > 0:
                self.ledger.mint_investor(investor, quota, issuer=fi)

        rate = as_fraction(cfg.discount_rate)
        for i, value in enumerate(values):
            client = clients[i // 2 % len(clients)]
            gc = contractors[i % len(contractors)]
            engineer = engineers[i % len(engineers)]
            accountant = accountants[i % len(accountants)]
            record = self.engine.open_workflow(client, gc, engineer, accountant, value)
            # The funding request is grossed up so the discounted mint equals
            # the contract value exactly and the schedule stays affordable.
            requested = ceil_div_ratio(value, rate)
            self.ledger.freeze_and_mint(
                gc, requested, issuer=fi, workflow=record.id
            )
            spec = AgentSpec("Workflow", record.id, record.wallet)
            self._workflow_agents.append(spec)
            self.agents.append(spec)

    # ------------------------------------------------------------------
    # stepping
    # ------------------------------------------------------------------

    def _all_archived(self) -> bool:
        return all(
            wf.state is WorkflowState.ARCHIVED for wf in self.state.workflows.values()
        )

    def step(self) -> None:
        """Advance the clock one tick and activate every agent once."""
        self.ledger.set_tick(self.ledger.tick + 1)

        technicians = list(self._technicians)
        self.rng.shuffle(technicians)
        for tech in technicians:
            self._act_technician(tech)

        contractors = list(self._contractors)
        self.rng.shuffle(contractors)
        for contractor in contractors:
            self._act_contractor(contractor)

        workflow_agents = list(self._workflow_agents)
        self.rng.shuffle(workflow_agents)
        for agent in workflow_agents:
            self._act_workflow(agent)

    def _act_technician(self, tech: AgentSpec) -> None:
        kind = AsseverationKind(tech.params["kind"])
        threshold = self.config.technician_approval_threshold
        for wid in sorted(self.state.workflows):
            record = self.state.workflows[wid]
            if record.state is WorkflowState.ARCHIVED:
                continue
            assigned = (
                record.engineer
                if kind is AsseverationKind.TECHNICAL
                else record.accountant
            )
            if assigned != tech.account:
                continue
            if record.has_asseveration(record.state, kind):
                continue
            if self.rng.random() < threshold:
                try:
                    self.engine.record_asseveration(wid, record.state, kind, tech.account)
                except SfcmError as exc:
                    self.ledger.warn(tech.account, "record_asseveration", str(exc))

    def _act_contractor(self, contractor: AgentSpec) -> None:
        threshold = self.config.gc_approval_threshold
        for wid in sorted(self.state.workflows):
            record = self.state.workflows[wid]
            if record.gc != contractor.account:
                continue
            if record.state is WorkflowState.ARCHIVED:
                continue
            target = next_state(record.state)
            if target is None or target is WorkflowState.ARCHIVED:
                continue
            required = record.schedule.get(target, 0)
            if required <= 0 or record.received(target) > 0:
                continue
            if self.rng.random() < threshold:
                try:
                    self.engine.record_anticipation(wid, target, required)
                except SfcmError as exc:
                    self.ledger.warn(contractor.account, "record_anticipation", str(exc))

    def _act_workflow(self, agent: AgentSpec) -> None:
        record = self.state.workflows[agent.id]
        try:
            if not self.engine.try_advance(agent.id):
                return
        except SfcmError as exc:
            self.ledger.warn(agent.id, "try_advance", str(exc))
            return
        self._after_advance(agent.id, record.state)
        if (
            self.config.incentive_penalty > 0
            and record.state in (WorkflowState.SAL1, WorkflowState.SAL2, WorkflowState.EOW)
        ):
            self._apply_wps_incentives()

    def _after_advance(self, workflow_id: str, entered: WorkflowState) -> None:
        """Redeem accumulated works payments on the two claim points."""
        pair = _CLAIM_PAIRS.get(entered)
        if pair is None:
            return
        record = self.state.workflows[workflow_id]
        wallet = self.state.account(record.wallet)
        # Keep the freshly received anticipation for the new state's fees.
        reserve = record.schedule.get(entered, 0) if entered is not WorkflowState.ARCHIVED else 0
        redeem = wallet.balance(DaoId.OPERATORS) - reserve
        if redeem <= 0 or record.credit_code is None:
            return
        link = self.state.links.get(record.credit_code)
        if link is None or link.status is not LinkStatus.ACTIVE:
            self.ledger.warn(record.gc, "redeem", f"link unavailable for {workflow_id}")
            return
        amount = min(redeem, link.operator_amount)
        if amount <= 0:
            return
        try:
            self.ledger.burn_and_release(
                record.wallet, record.credit_code, amount, issuer=self.ledger.fi
            )
        except SfcmError as exc:
            self.ledger.warn(record.gc, "burn_and_release", str(exc))
            return
        entered_at = record.state_entered_at
        durations = []
        for claimed in pair:
            following = next_state(claimed)
            durations.append(entered_at[following] - entered_at[claimed])
        self.ledger.record_redemption_claim(
            record.gc, workflow_id, pair, (durations[0], durations[1])
        )

    def _apply_wps_incentives(self) -> None:
        from .fraud import apply_incentives, score_supplier, supplier_stats_from_state

        stats = supplier_stats_from_state(self.state)
        if not stats:
            return
        averages = {
            gc: sum(s.t_avg_per_state.values()) / len(s.t_avg_per_state)
            for gc, s in stats.items()
            if s.t_avg_per_state
        }
        if not averages:
            return
        t_max = max(averages.values())
        classifications = {}
        for gc in sorted(stats):
            try:
                _, classification = score_supplier(
                    stats[gc],
                    weights=self.config.score_weights,
                    limit=self.config.score_limit,
                    t_max=t_max,
                )
            except InsufficientDataError:
                continue
            classifications[gc] = classification
        if classifications:
            apply_incentives(self.ledger, classifications, self.config.incentive_penalty)

    # ------------------------------------------------------------------
    # full run
    # ------------------------------------------------------------------

    def run(self) -> RunResult:
        """Step until every workflow archives or the tick budget runs out.

        A completed run sells every matured credit at the configured ratio of
        face value and closes the fund; hitting the budget first yields a
        partial run, reported as such rather than raised.
        """
        cfg = self.config
        while self.ledger.tick < cfg.max_ticks and not self._all_archived():
            self.step()

        payouts: dict[str, int] = {}
        if self._all_archived():
            ratio = as_fraction(cfg.credit_sale_ratio)
            for code in sorted(self.state.credits):
                credit = self.state.credits[code]
                if credit.state is CreditState.MATURED:
                    price = max(1, floor_ratio(ratio, credit.face_value))
                    self.ledger.sell_credit(code, price, issuer=self.ledger.fi)
            unsold = [
                code
                for code, credit in self.state.credits.items()
                if credit.state is not CreditState.SOLD
            ]
            if unsold:
                self.ledger.warn(self.ledger.fi, "close_fund", f"unsold credits {unsold}")
                status = "partial"
            else:
                payouts = self.ledger.close_fund_and_payout(issuer=self.ledger.fi)
                status = "completed"
        else:
            status = "partial"
        self.ledger.end_run(status)
        return RunResult(status=status, ledger=self.ledger, payouts=payouts)


def build_model(config: ScenarioConfig) -> Simulation:
    """Construct a scenario per the configuration (validated on entry)."""
    return Simulation(config)


def run(config: ScenarioConfig) -> RunResult:
    """Build and run a scenario end to end."""
    return Simulation(config).run()
