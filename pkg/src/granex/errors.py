"""Exception hierarchy shared across the package."""


class GranexError(Exception):
    """Base class for all errors raised by granex."""


class ParseError(GranexError):
    """The input document is not well-formed (position reported when known)."""


class InvariantError(GranexError):
    """A data-model invariant is violated; the message names the offending entity."""


class UnknownEntityError(GranexError):
    """A lookup referenced an id or type that does not exist."""


class UnfitError(GranexError):
    """A log does not perfectly fit a net, or a transition is never covered.

    ``diagnostics`` is a list of (entity id, reason) pairs.
    """

    def __init__(self, message: str, diagnostics: list[tuple[str, str]] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class InadmissibleError(GranexError):
    """An abstraction record cannot be applied to the current net."""


class StaleRecordError(GranexError):
    """The chosen record is not currently available or redoable."""


class BoundExceededError(GranexError):
    """State-space exploration hit the configured marking bound."""
