"""Likelihood-free model choice laboratory.

ABC rejection and model-choice samplers, exact Bayes-factor oracles for a set
of tractable models, and experiment harnesses comparing the two.
"""

__version__ = "0.1.0"

from abclab.errors import (
    CapabilityError,
    ConfigurationError,
    DomainError,
    EstimationError,
    IntegrationError,
    UndefinedValueError,
)
from abclab.streams import RandomStream

__all__ = [
    "CapabilityError",
    "ConfigurationError",
    "DomainError",
    "EstimationError",
    "IntegrationError",
    "RandomStream",
    "UndefinedValueError",
    "__version__",
]
