"""
MESQ Core

Shared enums, result dataclasses and the exception hierarchy.
"""

from mesq.core.base import (
    ArgumentError,
    EigenKind,
    EprVariant,
    LabelVariant,
    MesqError,
    NumericError,
    RangeError,
    Realization,
    StructureKind,
    UnsupportedInputError,
    UsageError,
    frozen_array,
    require_finite,
)

__all__ = [
    "ArgumentError",
    "EigenKind",
    "EprVariant",
    "LabelVariant",
    "MesqError",
    "NumericError",
    "RangeError",
    "Realization",
    "StructureKind",
    "UnsupportedInputError",
    "UsageError",
    "frozen_array",
    "require_finite",
]
