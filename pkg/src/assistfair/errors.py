"""Exception types shared across the package."""


class AssistFairError(Exception):
    """Base class for all package errors."""


class SpecValidationError(AssistFairError, ValueError):
    """A domain object violates one of its invariants."""


class EmptyCellError(AssistFairError, KeyError):
    """A prediction or decision was requested for an empty training cell."""

    def __str__(self) -> str:  # KeyError repr-quotes its message
        return str(self.args[0]) if self.args else ""


class SignalSupportError(AssistFairError, ValueError):
    """All posterior mass vanished: the signal lies outside the prior support."""


class PreconditionError(AssistFairError, ValueError):
    """A verification claim was invoked outside its stated preconditions."""


class ConfigError(AssistFairError, ValueError):
    """An experiment configuration document is malformed or inconsistent."""
