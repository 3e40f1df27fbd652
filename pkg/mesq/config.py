"""
MESQ - Configuration Management

Central configuration for tolerances, seeds, envelopes and output paths.
Values come from the environment (optionally a .env file); the CLI may
layer a plain-text key=value file and explicit flags on top.
"""

import os
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import load_dotenv

from mesq.core.base import RangeError, UsageError

# Load environment variables from .env file
load_dotenv()


class Config:
    """Library and CLI configuration."""

    # Base paths
    BASE_DIR = Path(__file__).parent.parent
    PACKAGE_DIR = Path(__file__).parent
    CONFIG_DIR = BASE_DIR / "config"
    DEFAULT_CONFIG_FILE = CONFIG_DIR / "mesq.conf"
    REPORT_DIR = Path(os.getenv("MESQ_REPORT_DIR", str(BASE_DIR / "data" / "reports")))

    # Numerics
    DEFAULT_TOL: float = float(os.getenv("MESQ_DEFAULT_TOL", "1e-10"))
    DEFAULT_SEED: int = int(os.getenv("MESQ_DEFAULT_SEED", "7"))
    SINGLE_MODE_PAD: int = int(os.getenv("MESQ_SINGLE_MODE_PAD", "512"))

    # Desk-scale envelope
    FOCK_MAX_DIM: int = int(os.getenv("MESQ_FOCK_MAX_DIM", "20000"))
    FOCK_MAX_MODES: int = int(os.getenv("MESQ_FOCK_MAX_MODES", "4"))
    GAUSSIAN_MAX_MODES: int = int(os.getenv("MESQ_GAUSSIAN_MAX_MODES", "8"))
    BCH_LAMBDA_MAX: float = 1.0
    SN_FOCK_LAMBDA_MAX: float = 0.5

    # Execution
    MAX_WORKERS: int = int(os.getenv("MESQ_MAX_WORKERS", "1"))
    LOG_LEVEL: str = os.getenv("MESQ_LOG_LEVEL", "WARNING")

    @classmethod
    def check_fock_envelope(cls, n_modes: int, cutoff: int) -> None:
        """Raise RangeError when a Fock computation exceeds the desk envelope."""
        if n_modes > cls.FOCK_MAX_MODES:
            raise RangeError(f"Fock engine supports at most {cls.FOCK_MAX_MODES} modes, got {n_modes}")
        if cutoff ** n_modes > cls.FOCK_MAX_DIM:
            raise RangeError(
                f"Fock dimension {cutoff}^{n_modes} = {cutoff ** n_modes} exceeds {cls.FOCK_MAX_DIM}"
            )

    @classmethod
    def check_gaussian_envelope(cls, n_modes: int) -> None:
        """Raise RangeError when a Gaussian computation exceeds the desk envelope."""
        if n_modes > cls.GAUSSIAN_MAX_MODES:
            raise RangeError(f"Gaussian engine envelope is n <= {cls.GAUSSIAN_MAX_MODES}, got {n_modes}")


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read a key=value configuration file.

    Blank lines and lines starting with '#' are skipped. Keys are the long
    CLI flag names with dashes or underscores ("n", "cutoff", "from").
    """
    path = Path(path)
    if not path.exists():
        raise UsageError(f"Config file not found: {path}")

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_float_list(text: Optional[str]) -> list:
    """Parse a comma separated list of reals ("1,0.5")."""
    if text is None or text.strip() == "":
        return []
    try:
        return [float(item) for item in text.split(",")]
    except ValueError as e:
        raise UsageError(f"Invalid number list {text!r}: {e}") from e


# Singleton instance
config = Config()
