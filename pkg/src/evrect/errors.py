"""Exception types shared across the toolkit."""


class EvrectError(Exception):
    """Base class for all toolkit errors."""


class DataError(EvrectError, ValueError):
    """Malformed or contract-violating input data (CLI exit code 2)."""


class UsageError(EvrectError):
    """Bad command-line usage or configuration (CLI exit code 1)."""


class CapacityError(DataError):
    """A model exceeds the limits of the strict packed-node profile."""
