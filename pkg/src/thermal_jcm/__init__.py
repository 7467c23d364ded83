"""Jaynes-Cummings population inversion at zero and low temperature.

The finite-temperature inversion is built from a third-order expansion in the
thermo-field-dynamics boson angle and checked against a truncated Fock-space
oracle.
"""
from .errors import DomainError, GuardError, VerificationError
from .kernels import BACKEND
from .model import ModelParams, DerivedParams, ThermalPoint, derive, g1, g2, thermal_point, theta_to_beta

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DomainError",
    "GuardError",
    "VerificationError",
    "ModelParams",
    "DerivedParams",
    "ThermalPoint",
    "derive",
    "g1",
    "g2",
    "thermal_point",
    "theta_to_beta",
    "__version__",
]
