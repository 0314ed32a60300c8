"""Symbolic dynamics toolkit for return-time recurrence sets."""

__version__ = "0.1.0"

from .errors import AlphabetMismatch, BudgetExceeded, NotFound, RecurError  # noqa: E402,F401
from .words import Word  # noqa: E402,F401
