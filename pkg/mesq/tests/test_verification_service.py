"""
MESQ - Verification Service and Report Model Tests

Run with: python -m pytest mesq/tests/test_verification_service.py -v
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor

import pytest
from pydantic import ValidationError

from mesq.core.base import ArgumentError, RangeError
from mesq.models.report_models import (
    SCHEMA_VERSION,
    CheckResult,
    Suite,
    SweepParameter,
    SweepRow,
    SweepTable,
)
from mesq.services.export_service import to_json
from mesq.services.verification_service import (
    VerificationService,
    epr_fidelity_formula,
    get_verification_service,
    log_slope,
)


@pytest.fixture
def service():
    return VerificationService(tol=1e-10, seed=7)


class TestReportModels:
    """Test the report schemas."""

    def test_residual_pass_flag(self):
        """Test that pass is value <= tolerance."""
        assert CheckResult.residual("a", 1e-12, 1e-10, "x").passed
        assert not CheckResult.residual("b", 1e-9, 1e-10, "x").passed

    def test_nan_never_passes(self):
        """Test that a NaN residual fails."""
        assert not CheckResult.residual("nan", float("nan"), 1.0, "x").passed

    def test_inconsistent_pass_flag(self):
        """Test that a pass flag contradicting the value is rejected."""
        with pytest.raises(ValidationError):
            CheckResult(name="c", value=1.0, tolerance=0.1, passed=True, provenance="x")

    def test_pass_alias_in_json(self):
        """Test that checks serialize the flag as 'pass'."""
        data = json.loads(to_json(CheckResult.residual("a", 0.0, 1e-10, "x")))
        assert data["pass"] is True
        assert "passed" not in data

    def test_json_numbers_carry_17_digits(self):
        """Test that JSON floats are written with 17 significant digits and read back exactly."""
        text = to_json(CheckResult.residual("a", 0.1, 1e-10, "x"))
        assert '"value": 0.10000000000000001' in text
        assert '"tolerance": 1e-10' in text
        data = json.loads(text)
        assert data["value"] == 0.1
        assert data["tolerance"] == 1e-10

    def test_integral_floats_stay_floats(self):
        """Test that 0.0 is written as a float."""
        data = json.loads(to_json(CheckResult.residual("zero", 0.0, 1e-10, "x")))
        assert isinstance(data["value"], float)

    def test_sweep_rows_must_ascend(self):
        """Test that sweep rows are strictly ascending."""
        rows = [SweepRow(param_value=1.0, observables={}), SweepRow(param_value=0.5, observables={})]
        with pytest.raises(ValidationError):
            SweepTable(parameter=SweepParameter.R, observable_names=[], rows=rows)


class TestHelpers:
    """Test the fit and fidelity helpers."""

    def test_log_slope(self):
        """Test that an exact exponential gives its rate."""
        xs = [0.0, 0.5, 1.0, 1.5]
        assert log_slope(xs, [math.exp(-2.0 * x) for x in xs]) == pytest.approx(-2.0)

    def test_golden_fidelity(self):
        """Test 0.887082 at r = 1 and 8/9 as r grows."""
        assert epr_fidelity_formula(1.0) == pytest.approx(0.887082, abs=1e-6)
        assert epr_fidelity_formula(20.0) == pytest.approx(8.0 / 9.0, abs=1e-12)


class TestVerificationService:
    """Test suites end to end."""

    def test_matrices(self, service):
        """Test that the matrix suite passes at n = 5."""
        report = service.run(Suite.MATRICES, n=5)
        assert report.passed
        assert report.suite is Suite.MATRICES
        assert report.n == 5
        assert report.cutoff is None
        assert report.schema_version == SCHEMA_VERSION
        assert report.checks

    @pytest.mark.parametrize("n", [2, 3])
    def test_su11_uses_default_cutoff(self, service, n):
        """Test the su11 suite at its default cutoff."""
        report = service.run("su11", n=n)
        assert report.cutoff == 12
        assert report.passed

    @pytest.mark.parametrize("n", [2, 3])
    def test_bch_records_lowering_sign_note(self, service, n):
        """Test that the bch suite passes and reports the lowering-sign finding."""
        report = service.run(Suite.BCH, n=n)
        assert report.passed, [c.name for c in report.failures]
        assert any("lowering factor" in note for note in report.notes)

    @pytest.mark.parametrize("n", [2, 3])
    def test_eigen(self, service, n):
        """Test twenty random labels of both families."""
        report = service.run(Suite.EIGEN, n=n)
        assert report.passed, [c.name for c in report.failures]
        assert sum(1 for c in report.checks if c.name.startswith("eigen/p_chi/")) == 21

    def test_entangle(self, service):
        """Test the entangling operator suite."""
        report = service.run(Suite.ENTANGLE, n=2)
        assert report.passed, [c.name for c in report.failures]
        assert any("fidelity" in note for note in report.notes)

    @pytest.mark.parametrize("n", [2, 3])
    def test_squeeze(self, service, n):
        """Test the squeezing suite."""
        report = service.run(Suite.SQUEEZE, n=n)
        assert report.passed, [c.name for c in report.failures]

    def test_hamiltonian(self, service):
        """Test rates, H_I and cross-engine agreement."""
        report = service.run(Suite.HAMILTONIAN, n=2)
        assert report.passed, [c.name for c in report.failures]

    def test_completeness(self, service):
        """Test the resolution of the identity."""
        report = service.run(Suite.COMPLETENESS, n=2)
        assert report.passed, [c.name for c in report.failures]
        assert report.cutoff == 8
        assert any("8^2 box" in note for note in report.notes)

    def test_completeness_cutoff(self, service):
        """Test that --cutoff sets the Fock box of the quadrature."""
        report = service.run(Suite.COMPLETENESS, n=2, cutoff=4)
        assert report.passed, [c.name for c in report.failures]
        assert report.cutoff == 4
        assert any("4^2 box" in note for note in report.notes)

    def test_defaults_from_config(self):
        """Test that tolerance and seed fall back to the configuration."""
        default = VerificationService()
        assert default.tol == 1e-10
        assert default.seed == 7

    def test_unknown_suite(self, service):
        """Test that unknown suite names are rejected."""
        with pytest.raises(ValueError):
            service.run("nonsense", n=2)

    @pytest.mark.parametrize("n", [1, 0])
    def test_too_few_modes(self, service, n):
        """Test that fewer than two modes is an argument error."""
        with pytest.raises(ArgumentError):
            service.run(Suite.MATRICES, n=n)

    def test_gaussian_envelope(self, service):
        """Test that n above the Gaussian envelope is a range error."""
        with pytest.raises(RangeError):
            service.run(Suite.MATRICES, n=9)

    def test_deterministic(self):
        """Test that two runs agree on everything except wall time."""
        first = VerificationService(seed=3).run(Suite.EIGEN, n=2).model_dump(exclude={"wall_time_ms"})
        second = VerificationService(seed=3).run(Suite.EIGEN, n=2).model_dump(exclude={"wall_time_ms"})
        assert first == second

    def test_runs_do_not_share_results(self, service):
        """Test that each run reports only its own checks."""
        service.run(Suite.MATRICES, n=4)
        report = service.run(Suite.MATRICES, n=2)
        assert {c.name.split("/")[1] for c in report.checks} == {"n=2"}

    def test_concurrent_runs_on_one_service(self):
        """Test that parallel runs on the shared instance keep their checks apart."""
        shared = get_verification_service()
        suites = [Suite.MATRICES, Suite.HAMILTONIAN, Suite.MATRICES, Suite.HAMILTONIAN]
        with ThreadPoolExecutor(max_workers=4) as pool:
            reports = list(pool.map(lambda s: shared.run(s, n=3), suites))
        for suite, report in zip(suites, reports):
            assert report.suite is suite
            assert all(c.name.startswith(f"{suite.value}/") for c in report.checks)
        assert len(reports[0].checks) == len(reports[2].checks)
        assert len(reports[1].checks) == len(reports[3].checks)

    def test_singleton(self):
        """Test that the getter returns one shared instance."""
        assert get_verification_service() is get_verification_service()
