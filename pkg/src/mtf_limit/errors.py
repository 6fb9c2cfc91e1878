"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateInputError(ValueError):
    """Input from which no request distribution can be built (e.g. all-zero weights)."""


class ConvergenceError(RuntimeError):
    """A numerical routine exhausted its budget without reaching tolerance."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class SizeError(DomainError):
    """Problem too large for an exhaustive method."""
