"""Exception types shared across the toolkit."""


class IdselError(Exception):
    """Base class for all idsel errors."""


class ValidationError(IdselError):
    """Input violates a documented invariant or precondition."""


class FormatError(IdselError):
    """A file does not conform to its documented format."""


class StateError(IdselError):
    """Operation not valid in the object's current state (wrong status,
    stale document head, or a result requested before it exists)."""
