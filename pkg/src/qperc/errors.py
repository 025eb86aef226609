"""Exception types raised across the package."""


class QpercError(Exception):
    """Base class for package-specific failures."""


class ConvergenceError(QpercError, RuntimeError):
    """An iteration or rejection loop hit its configured cap."""


class CapExceededError(QpercError, RuntimeError):
    """A sampled object grew beyond its size cap."""


class HypothesisViolation(QpercError, ValueError):
    """The premises of a checked inequality do not hold for the input."""


class ConfigError(QpercError, ValueError):
    """An experiment configuration is malformed."""
