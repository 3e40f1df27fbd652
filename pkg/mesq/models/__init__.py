"""
MESQ - Pydantic schemas for reports, sweep tables and state dumps.
"""

from mesq.models.report_models import (
    SCHEMA_VERSION,
    CheckResult,
    FockCoefficient,
    StateDump,
    StateKind,
    Suite,
    SweepParameter,
    SweepRow,
    SweepTable,
    VerificationReport,
)

__all__ = [
    "SCHEMA_VERSION",
    "CheckResult",
    "FockCoefficient",
    "StateDump",
    "StateKind",
    "Suite",
    "SweepParameter",
    "SweepRow",
    "SweepTable",
    "VerificationReport",
]
