"""Exception types shared across the package."""


class SpinstarError(Exception):
    """Base class for all package errors."""


class DimensionError(SpinstarError):
    """Matrix dimensions are inconsistent or exceed the configured cap."""


class ContractError(SpinstarError):
    """A numerical precondition (Hermiticity, unit trace, ...) was violated."""


class DomainError(SpinstarError):
    """A parameter value lies outside its mathematical domain."""


class ConfigError(SpinstarError):
    """Invalid run configuration. Carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EngineError(SpinstarError):
    """The requested propagation engine does not apply to this model."""


class BracketError(SpinstarError):
    """Bisection endpoints do not bracket a witness transition."""
