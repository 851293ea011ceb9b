"""Domain exceptions raised by ledger, workflow and simulation operations."""

from __future__ import annotations


class SfcmError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SfcmError):
    """Scenario configuration failed validation or could not be parsed."""


class ValidationError(SfcmError):
    """An operation argument is out of range or inconsistent."""


class RoleError(SfcmError):
    """An account with the wrong role attempted an operation."""


class FundClosedError(SfcmError):
    """Investor deposit attempted after the fund closed."""


class FundOpenError(SfcmError):
    """Fund closing requested while positions are still open."""


class CoverageError(SfcmError):
    """Operator mint not covered by free investor supply."""


class InsufficientBalanceError(SfcmError):
    """Debit exceeds the payer's balance."""


class LinkError(SfcmError):
    """Burn against a released or over-drawn freeze link."""


class MaturityError(SfcmError):
    """Credit lifecycle transition attempted out of order."""


class SequenceError(SfcmError):
    """Workflow payment targeted the wrong state."""


class DuplicateError(SfcmError):
    """An asseveration was recorded twice for the same slot."""


class StateError(SfcmError):
    """Operation not available in the workflow's current state."""


class InsufficientDataError(SfcmError):
    """Supplier scoring requested with no observed history."""


class IntegrityError(SfcmError):
    """Event log hash chain or internal accounting invariant broken."""


class ConstraintError(SfcmError):
    """A knowledge-base constraint rejected the operation inline.

    Carries the constraint identifier so callers can tell which of the six
    rules fired.
    """

    def __init__(self, constraint, message: str):
        self.constraint = constraint
        super().__init__(f"{getattr(constraint, 'value', constraint)}: {message}")
