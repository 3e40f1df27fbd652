"""
MESQ - Core Types

Enums shared by the engines and the exception hierarchy every module raises.
All numerical values handed between modules are immutable: arrays are copied
and flagged read-only on construction.
"""

import enum
from typing import Any

import numpy as np


# ============================================================================
# ENUMS
# ============================================================================

class StructureKind(str, enum.Enum):
    """Closed-form structure matrices indexed by mode count."""
    N = "N"          # (n-1)x(n-1) completeness kernel
    F = "F"          # (n-1)x(n-1) Fourier-chain kernel
    FINV = "Finv"    # inverse of F
    G = "G"          # n x n involution, G = I - 2G'
    GP = "Gp"        # rank-1 projector onto the collective mode
    GPP = "Gpp"      # rank n-1 projector onto the relative modes


class Realization(str, enum.Enum):
    """Quadratic SU(1,1) realizations, named by their structure matrix."""
    G = "G"
    GP = "Gp"
    GPP = "Gpp"

    @property
    def structure(self) -> StructureKind:
        return StructureKind(self.value)


class LabelVariant(str, enum.Enum):
    """Which family of entangled eigenstates a label refers to."""
    P_CHI = "p_chi"    # total momentum p, relative coordinates chi_2..chi_n
    CHI_P = "chi_p"    # total coordinate chi, relative momenta p_2..p_n


class EigenKind(str, enum.Enum):
    """Single-mode eigenstate type."""
    COORDINATE = "coordinate"
    MOMENTUM = "momentum"


class EprVariant(str, enum.Enum):
    """Input squeezing pattern fed into the beam-splitter network."""
    P_CHI_ZERO = "p_chi_zero"    # mode 1 momentum-squeezed, others position-squeezed
    CHI_P_ZERO = "chi_p_zero"    # mode 1 position-squeezed, others momentum-squeezed


# ============================================================================
# EXCEPTIONS
# ============================================================================

class MesqError(Exception):
    """Base class for all library errors."""


class ArgumentError(MesqError, ValueError):
    """Invalid argument: mode out of range, mismatched spaces or dimensions."""


class NumericError(MesqError, ArithmeticError):
    """Non-finite input, degenerate projection or a failed exactness assertion."""


class RangeError(MesqError, ValueError):
    """Parameter outside a documented envelope."""


class UnsupportedInputError(MesqError):
    """Input the operation deliberately does not handle (e.g. mixed states)."""


class UsageError(MesqError):
    """Command-line usage problem."""


# ============================================================================
# HELPERS
# ============================================================================

def frozen_array(value: Any, dtype: Any = None) -> np.ndarray:
    """Copy `value` into a read-only numpy array."""
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def require_finite(arr: np.ndarray, what: str) -> None:
    """Raise NumericError if `arr` holds NaN or infinity."""
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{what} has non-finite entries")
