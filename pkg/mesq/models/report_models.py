"""
MESQ - Report Pydantic Models

External schemas for everything the CLI writes: verification reports,
sweep tables and state dumps. They handle validation and serialization;
the numerical work never sees them.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = "mesq-report/1"


# ============================================================================
# ENUMS
# ============================================================================

class Suite(str, Enum):
    MATRICES = "matrices"
    SU11 = "su11"
    BCH = "bch"
    EIGEN = "eigen"
    ENTANGLE = "entangle"
    SQUEEZE = "squeeze"
    HAMILTONIAN = "hamiltonian"
    COMPLETENESS = "completeness"
    ALL = "all"


class SweepParameter(str, Enum):
    LAMBDA = "lambda"
    R = "r"
    T = "t"


class StateKind(str, Enum):
    FOCK = "fock"
    GAUSSIAN = "gaussian"


# ============================================================================
# VERIFICATION
# ============================================================================

class CheckResult(BaseModel):
    """One residual-type check: passes when value <= tolerance."""
    model_config = ConfigDict(populate_by_name=True)

    name: str
    value: float = Field(..., description="Residual (non-negative)")
    tolerance: float = Field(..., ge=0)
    passed: bool = Field(..., alias="pass")
    provenance: str = Field(..., description="Identity or oracle the check reproduces")

    @model_validator(mode="after")
    def _pass_matches_value(self):
        if self.passed != (self.value <= self.tolerance):
            raise ValueError(f"check {self.name}: pass flag disagrees with value/tolerance")
        return self

    @classmethod
    def residual(cls, name: str, value: float, tolerance: float, provenance: str) -> "CheckResult":
        value = float(value)
        # NaN never passes
        passed = bool(value <= tolerance)
        return cls(name=name, value=value, tolerance=float(tolerance), passed=passed, provenance=provenance)


class VerificationReport(BaseModel):
    """Result of one `verify` run."""
    model_config = ConfigDict(populate_by_name=True)

    schema_version: str = SCHEMA_VERSION
    suite: Suite
    n: int = Field(..., ge=2)
    cutoff: Optional[int] = Field(None, description="Fock cutoff d, if the suite uses the Fock engine")
    tol: float
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list, description="Diagnostics and findings, never failures")
    wall_time_ms: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


# ============================================================================
# SWEEPS
# ============================================================================

class SweepRow(BaseModel):
    param_value: float
    observables: Dict[str, float]


class SweepTable(BaseModel):
    """Observables on an ascending parameter grid, plus fitted log-slopes."""
    schema_version: str = SCHEMA_VERSION
    parameter: SweepParameter
    observable_names: List[str]
    rows: List[SweepRow]
    log_slopes: Dict[str, Optional[float]] = Field(default_factory=dict)

    @field_validator("rows")
    @classmethod
    def _ascending_unique(cls, rows: List[SweepRow]) -> List[SweepRow]:
        values = [row.param_value for row in rows]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep rows must be strictly ascending in param_value")
        return rows

    def column(self, name: str) -> List[float]:
        return [row.observables[name] for row in self.rows]


# ============================================================================
# STATE DUMPS
# ============================================================================

class FockCoefficient(BaseModel):
    index: List[int] = Field(..., description="Occupation numbers, mode 1 first")
    re: float
    im: float


class StateDump(BaseModel):
    """Ideal Fock coefficients or a regularized Gaussian state."""
    schema_version: str = SCHEMA_VERSION
    kind: StateKind
    n: int = Field(..., ge=2)
    variant: str
    label: List[float]
    cutoff: Optional[int] = None
    r: Optional[float] = None
    coefficients: Optional[List[FockCoefficient]] = None
    mean: Optional[List[float]] = None
    cov: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _payload_matches_kind(self):
        if self.kind is StateKind.FOCK and (self.coefficients is None or self.cutoff is None):
            raise ValueError("a Fock dump needs cutoff and coefficients")
        if self.kind is StateKind.GAUSSIAN and (self.mean is None or self.cov is None or self.r is None):
            raise ValueError("a Gaussian dump needs r, mean and cov")
        return self
