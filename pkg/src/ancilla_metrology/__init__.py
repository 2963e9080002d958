"""Ancilla-assisted Heisenberg-limited phase estimation with collective spins."""
from .errors import (
    ConfigError,
    ContractViolation,
    DomainError,
    InvalidDimensionError,
    InvalidStateError,
    MetrologyError,
    NonDifferentiableError,
    SingularPointError,
)
from .protocol import AncillaPrep, ProbePrep, ProtocolParams, Schedule, run
from .pipeline import circuit_cfi, circuit_qfi

__version__ = "0.1.0"

__all__ = [
    "AncillaPrep", "ProbePrep", "ProtocolParams", "Schedule", "run",
    "circuit_cfi", "circuit_qfi",
    "ConfigError", "ContractViolation", "DomainError", "InvalidDimensionError",
    "InvalidStateError", "MetrologyError", "NonDifferentiableError", "SingularPointError",
]
