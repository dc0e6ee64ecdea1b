"""Exception classes shared across the package."""


class Ac3diError(Exception):
    """Base class for every error the package raises on purpose."""


class SizeError(Ac3diError, ValueError):
    """An array has the wrong length or shape for the requested operation."""


class BudgetError(Ac3diError, ValueError):
    """A pattern budget is too small to be meaningful."""


class ConfigError(Ac3diError, ValueError):
    """Invalid or inconsistent configuration."""


class IncompleteLogError(Ac3diError):
    """A replayed measurement log is missing records needed by a stage."""


class UsageError(Ac3diError, ValueError):
    """Bad user-supplied choice, e.g. an unknown scene kind."""
