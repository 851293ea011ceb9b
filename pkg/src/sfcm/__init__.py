"""Dual-DAO fiscal credit ledger, workflow automaton and simulator."""

from .config import ScenarioConfig
from .ledger import CreditLedger, split_largest_remainder
from .workflow import WorkflowEngine
from .agents import Simulation, build_model, run
from .constraints import ConstraintId, Violation, check_all
from .replay import validate_lines, verify_lines

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "CreditLedger",
    "WorkflowEngine",
    "Simulation",
    "build_model",
    "run",
    "ConstraintId",
    "Violation",
    "check_all",
    "validate_lines",
    "verify_lines",
    "split_largest_remainder",
    "__version__",
]
