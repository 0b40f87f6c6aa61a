"""Exception hierarchy for qlangevin."""


class QLangevinError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(QLangevinError, ValueError):
    """An input or a domain object violates its invariants."""


class DimensionError(ValidationError):
    """Operands have incompatible shapes."""


class NumericalQualityError(QLangevinError, ArithmeticError):
    """A computed result failed its post-condition."""

    def __init__(self, message: str, diagnostics: dict | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResourceGuardError(QLangevinError, MemoryError):
    """A requested computation exceeds the configured size guard."""


class ToleranceError(QLangevinError):
    """An acceptance check did not meet its tolerance."""
