"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class NumericalFailure(ArithmeticError):
    """A factorization failed even after the jitter ladder was exhausted."""


class MeasureHasNoQ(LookupError):
    """The robustness measure has no explicit width function q(a)."""


class ConfigError(ValueError):
    """Campaign configuration is invalid.

    ``violations`` holds every problem found, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DataError(ValueError):
    """Input data is structurally valid but incomplete or inconsistent."""


class ParseError(DataError):
    """A data file could not be parsed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
