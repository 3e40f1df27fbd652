"""
MESQ - Sweep Service Tests

Run with: python -m pytest mesq/tests/test_sweep_service.py -v
"""

import math

import numpy as np
import pytest

from mesq.core.base import ArgumentError, RangeError, UsageError
from mesq.models.report_models import SweepParameter
from mesq.services.sweep_service import SweepService, fit_log_slope, get_sweep_service


class TestSweeps:
    """Test grids, observables and slopes."""

    def test_lambda_sweep(self):
        """Test Var(X) = e^{-2 lam}/4 along the grid and a log-slope of -2."""
        table = SweepService().sweep("lambda", 0.0, 1.0, 6, ["var_collective_X"], n=3)
        assert table.parameter is SweepParameter.LAMBDA
        for lam, value in zip(np.linspace(0.0, 1.0, 6), table.column("var_collective_X")):
            assert value == pytest.approx(math.exp(-2.0 * lam) / 4.0, rel=1e-12)
        assert table.log_slopes["var_collective_X"] == pytest.approx(-2.0, abs=1e-10)

    def test_uncertainty_product_is_flat(self):
        """Test that Delta X Delta Y stays at 1/16 across lambda."""
        table = SweepService().sweep(SweepParameter.LAMBDA, 0.0, 1.5, 4, ["uncertainty_product"])
        assert np.allclose(table.column("uncertainty_product"), 1.0 / 16.0, atol=1e-12)

    def test_r_sweep_slopes(self):
        """Test that every r observable falls as e^{-2r}."""
        table = SweepService().sweep("r", 0.0, 3.0, 13, n=3)
        assert table.observable_names == SweepService.available("r")
        for name, slope in table.log_slopes.items():
            assert slope == pytest.approx(-2.0, abs=0.01), name

    def test_time_sweep(self):
        """Test sum P ~ e^{-(n-1) bx t} and X_1 - X_2 ~ e^{-bx t} at n = 4."""
        table = SweepService().sweep("t", 0.0, 2.0, 5, n=4, beta_chi=0.5)
        for t, total, rel in zip(np.linspace(0.0, 2.0, 5), table.column("scale_sumP"), table.column("scale_rel_X")):
            assert total == pytest.approx(math.exp(-1.5 * t), rel=1e-12)
            assert rel == pytest.approx(math.exp(-0.5 * t), rel=1e-12)

    def test_thread_pool_keeps_order(self):
        """Test that parallel evaluation returns rows in grid order."""
        serial = SweepService(max_workers=1).sweep("r", 0.0, 2.0, 9, ["var_total_P"], n=2)
        parallel = SweepService(max_workers=4).sweep("r", 0.0, 2.0, 9, ["var_total_P"], n=2)
        assert serial.model_dump() == parallel.model_dump()

    def test_unknown_observable(self):
        """Test that observables belong to their parameter."""
        with pytest.raises(UsageError):
            SweepService().sweep("lambda", 0.0, 1.0, 3, ["var_total_P"])

    def test_unknown_parameter(self):
        """Test that only lambda, r and t can be swept."""
        with pytest.raises(UsageError):
            SweepService().sweep("omega", 0.0, 1.0, 3)

    @pytest.mark.parametrize("start,stop,steps", [(1.0, 0.0, 3), (0.0, 1.0, 1)])
    def test_bad_grid(self, start, stop, steps):
        """Test that descending ranges and single points are rejected."""
        with pytest.raises(ArgumentError):
            SweepService().sweep("r", start, stop, steps)

    def test_envelope(self):
        """Test that n above the Gaussian envelope is a range error."""
        with pytest.raises(RangeError):
            SweepService().sweep("r", 0.0, 1.0, 3, n=9)

    def test_slope_needs_positive_values(self):
        """Test that slopes are only fitted to positive series."""
        assert fit_log_slope([0.0, 1.0], [1.0, 0.0]) is None
        assert fit_log_slope([0.0, 1.0], [1.0, math.e]) == pytest.approx(1.0)

    def test_singleton(self):
        """Test that the getter returns one shared instance."""
        assert get_sweep_service() is get_sweep_service()
