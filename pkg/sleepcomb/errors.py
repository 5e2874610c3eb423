"""Exception hierarchy shared by every sleepcomb module."""

from typing import Optional


class SleepcombError(Exception):
    """Base class for errors raised by sleepcomb."""


class InvalidInstance(SleepcombError, ValueError):
    """Raised for malformed labels, graphs, instances or parameters."""


class MissingLoss(SleepcombError, KeyError):
    """Raised when a loss is requested for an element that has none.

    In a well-formed game this means a sleeping element was charged.
    """

    def __str__(self) -> str:
        return Exception.__str__(self)


class TooLarge(SleepcombError):
    """Raised when an enumeration or search exceeds its cap."""

    def __init__(self, message: str, limit: Optional[int] = None):
        super().__init__(message)
        self.limit = limit


class ProtocolViolation(SleepcombError):
    """Raised when a learner plays an action that is not awake or not in D."""


class UnsupportedLossRange(SleepcombError, ValueError):
    """Raised when losses fall outside what a solver or wrapper supports."""


class NoAwakeAction(SleepcombError):
    """Raised when an awake action is required but none exists."""


class ConstructionDefect(SleepcombError):
    """A proof construction failed one of its per-round guarantees."""


class NotUnique(ConstructionDefect):
    """More than one member of D_phi is awake in a round."""


class NoneAwake(ConstructionDefect):
    """No member of D_phi is awake in a round."""
