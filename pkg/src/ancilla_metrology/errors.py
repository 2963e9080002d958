"""Exception hierarchy shared by the simulator, the Fisher engines and the CLI."""


class MetrologyError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(MetrologyError, ValueError):
    """Spin count or matrix shape is not usable."""


class DomainError(MetrologyError, ValueError):
    """A quantum number or parameter lies outside its allowed range."""


class ContractViolation(MetrologyError, ValueError):
    """A numerical precondition failed, e.g. a non-Hermitian generator."""


class InvalidStateError(ContractViolation):
    """Density matrix with eigenvalues clearly below zero."""


class NonDifferentiableError(MetrologyError, ArithmeticError):
    """Finite-difference estimates at h and h/2 disagree grossly."""


class SingularPointError(MetrologyError, ArithmeticError):
    """A vanishing outcome probability has a non-vanishing slope."""


class ConfigError(MetrologyError, ValueError):
    """Invalid run configuration."""
