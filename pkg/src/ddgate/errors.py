"""Exception hierarchy shared by all modules."""


class DDGateError(Exception):
    """Base class for package errors."""


class InvalidDimensionError(DDGateError, ValueError):
    pass


class LayoutError(DDGateError, ValueError):
    pass


class DomainError(DDGateError, ValueError):
    pass


class SingularityError(DDGateError, ZeroDivisionError):
    pass


class InvalidGatePlanError(DDGateError, ValueError):
    def __init__(self, message: str, reasons: list[str] | None = None):
        super().__init__(message)
        self.reasons = list(reasons or [])


class UnsupportedConfigurationError(DDGateError, ValueError):
    pass


class InternalConsistencyError(DDGateError, RuntimeError):
    pass


class StepSizeError(DDGateError, RuntimeError):
    pass


class ConvergenceError(DDGateError, RuntimeError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = dict(report or {})


class InversionError(DDGateError, ValueError):
    def __init__(self, message: str, condition_number: float = float("inf")):
        super().__init__(message)
        self.condition_number = condition_number


class ConfigError(DDGateError, ValueError):
    pass


class PhysicsValidityError(DDGateError, RuntimeError):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class TruncationWarning(UserWarning):
    """Population leaked into the highest retained Fock levels."""
