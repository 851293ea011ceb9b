"""Append-only event log with hash-chained tamper evidence.

The log is the audit artifact: one JSON object per line with fields
{seq, tick, kind, actor, payload, state_hash}. `state_hash` chains the
previous event's hash, the event body and a digest of the post-state, so
flipping any byte of any record (or reordering records) is detected by
replaying the log and recomputing the chain.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .core import State, canonical_json
from .errors import IntegrityError

# Event kinds. Every kind has a mechanical apply function in transitions.py.
GENESIS = "genesis"
ACCOUNT_CREATED = "account_created"
INVESTOR_DEPOSIT = "investor_deposit"
FREEZE_AND_MINT = "freeze_and_mint"
TRANSFER = "transfer"
BURN_AND_RELEASE = "burn_and_release"
REDEEM_CLAIM = "redeem_claim"
CREDIT_MATURED = "credit_matured"
CREDIT_SOLD = "credit_sold"
FUND_CLOSED = "fund_closed"
WORKFLOW_OPENED = "workflow_opened"
ANTICIPATION_RECORDED = "anticipation_recorded"
ASSEVERATION_RECORDED = "asseveration_recorded"
WORKFLOW_ADVANCED = "workflow_advanced"
WARNING = "warning"
RUN_END = "run_end"

GENESIS_PREV_HASH = hashlib.sha256(b"sfcm:genesis").hexdigest()


@dataclass(frozen=True)
class Event:
    seq: int
    tick: int
    kind: str
    actor: str
    payload: dict
    state_hash: str

    def core_dict(self) -> dict:
        return {
            "seq": self.seq,
            "tick": self.tick,
            "kind": self.kind,
            "actor": self.actor,
            "payload": self.payload,
        }

    def to_line(self) -> str:
        record = self.core_dict()
        record["state_hash"] = self.state_hash
        return canonical_json(record)

    @staticmethod
    def from_line(line: str) -> "Event":
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"unparseable event record: {exc}") from exc
        try:
            return Event(
                seq=record["seq"],
                tick=record["tick"],
                kind=record["kind"],
                actor=record["actor"],
                payload=record["payload"],
                state_hash=record["state_hash"],
            )
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"malformed event record: {exc}") from exc


def snapshot_digest(state: State) -> str:
    return hashlib.sha256(canonical_json(state.snapshot_dict()).encode()).hexdigest()


def chain_hash(prev_hash: str, core: dict, state_digest: str) -> str:
    h = hashlib.sha256()
    h.update(prev_hash.encode())
    h.update(b"\n")
    h.update(canonical_json(core).encode())
    h.update(b"\n")
    h.update(state_digest.encode())
    return h.hexdigest()


class EventLog:
    """In-memory append-only sequence of events."""

    def __init__(self) -> None:
        self._events: list[Event] = []

    def append(self, event: Event) -> None:
        if event.seq != len(self._events):
            raise IntegrityError(
                f"non-monotone seq {event.seq}, expected {len(self._events)}"
            )
        self._events.append(event)

    @property
    def events(self) -> list[Event]:
        return list(self._events)

    def last_hash(self) -> str:
        return self._events[-1].state_hash if self._events else GENESIS_PREV_HASH

    def lines(self) -> list[str]:
        return [e.to_line() for e in self._events]

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self._events)


def parse_lines(lines: Iterable[str]) -> list[Event]:
    return [Event.from_line(line) for line in lines if line.strip()]
