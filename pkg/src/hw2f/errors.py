"""Exception hierarchy shared by every module."""


class Hw2fError(Exception):
    """Base class for all library errors."""


class DomainError(Hw2fError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(Hw2fError, ValueError):
    """Model or experiment settings violate a precondition."""


class DegenerateError(Hw2fError, ArithmeticError):
    """A quantity is undefined because some variance vanishes."""


class DegenerateCorrelationError(DegenerateError):
    """A correlation is undefined because one of the series has zero variance."""


class UnattainableTargetError(Hw2fError, ArithmeticError):
    """A calibration target lies outside the range the model can produce."""

    def __init__(self, message, minimum):
        super().__init__(message)
        self.minimum = minimum
