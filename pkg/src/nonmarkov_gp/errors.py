"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument is outside the domain an operation accepts."""


class UnsupportedVariantError(ValueError):
    """The operation is not defined for this kind of input."""


class NumericalDomainError(ArithmeticError):
    """A computation produced or met a non-finite value.

    ``time`` carries the offending time coordinate when one is known.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DegenerateTrajectoryError(ArithmeticError):
    """Eigenvalues of a density-matrix trajectory cross, so eigenbranches are ambiguous."""


class ConfigurationError(ValueError):
    """A sweep configuration could not be parsed or validated."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedInputError(InvalidInputError):
    """The input is well-formed but lies outside what the method handles."""
