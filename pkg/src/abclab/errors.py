"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain of a distribution or operation."""


class IntegrationError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance.

    ``estimate`` and ``error`` hold the last log-integral estimate and the log
    of its absolute error bound.
    """

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class CapabilityError(LookupError):
    """A model lacks an exact-inference hook required by the caller."""


class EstimationError(ValueError):
    """Not enough accepted particles to form an estimate."""


class UndefinedValueError(ArithmeticError):
    """A closed-form expression is undefined at the requested input."""


class ConfigurationError(ValueError):
    """An experiment or CLI configuration is invalid."""
