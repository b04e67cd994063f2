"""Exception types shared across the package."""


class AoiqError(Exception):
    """Base class for all package errors."""


class DistributionError(AoiqError, ValueError):
    """Invalid distribution parameters."""


class UndefinedMomentError(DistributionError):
    """Requested moment does not exist (heavy tail)."""


class MgfDomainError(DistributionError):
    """MGF argument outside the convergence region."""


class ScenarioError(AoiqError, ValueError):
    """Invalid scenario (rates, slowdown factor, or cap violation)."""


class ConvergenceError(AoiqError, RuntimeError):
    """A series or numerical-differentiation step failed to converge."""


class InsufficientDataError(AoiqError, ValueError):
    """Not enough recorded samples to compute the requested statistic."""


class ConfigError(AoiqError, ValueError):
    """Configuration file failed schema validation.

    ``path`` names the offending location in the document.
    """

    def __init__(self, message, path="$"):
        super().__init__(f"config error at {path}: {message}")
        self.path = path
