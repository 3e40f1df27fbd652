"""
MESQ - Services

Engines (fock_engine, gaussian_engine), the physics services (algebra, state,
dynamics) and the drivers behind the CLI (verification, sweep, export).
"""

from mesq.services.sweep_service import SweepService, get_sweep_service
from mesq.services.verification_service import VerificationService, get_verification_service

__all__ = [
    "SweepService",
    "VerificationService",
    "get_sweep_service",
    "get_verification_service",
]
