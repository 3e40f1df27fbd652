"""
MESQ - shared test fixtures

Run with: python -m pytest mesq/tests -v
"""

import pytest

from mesq.config import config
from mesq.services.fock_engine import FockSpace


@pytest.fixture
def two_mode_space():
    """Two modes, cutoff 10."""
    return FockSpace(2, 10)


@pytest.fixture
def single_mode_space():
    return FockSpace(1, 16)


@pytest.fixture
def report_dir(tmp_path, monkeypatch):
    """Redirect default report output into a temporary directory."""
    monkeypatch.setattr(config, "REPORT_DIR", tmp_path / "reports")
    return tmp_path / "reports"
