"""Exception hierarchy shared by every module."""


class RecurError(Exception):
    """Domain error: bad input or a construction that cannot proceed."""


class AlphabetMismatch(RecurError, ValueError):
    pass


class BudgetExceeded(RecurError):
    """An enumeration or graph build would exceed its configured cap."""


class NotFound(RecurError):
    """A search (connector, component, certificate) came back empty."""
