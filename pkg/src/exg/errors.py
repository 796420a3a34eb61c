"""Exception hierarchy shared by the tracing, graph and analysis layers."""


class ExgError(Exception):
    """Base class for every error raised by this package."""


# recorder misuse
class RecorderError(ExgError):
    pass


class NestedTrace(RecorderError):
    pass


class NoOpenTrace(RecorderError):
    pass


class EmptyTaskStack(RecorderError):
    pass


class UnclosedRegion(RecorderError):
    pass


class MalformedTrace(ExgError):
    """Raised when a trace stream cannot be parsed.

    ``line`` is the 1-based line number of the offending input, when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedGraph(ExgError):
    pass


class InvalidLength(ExgError, ValueError):
    pass


class InvalidParameter(ExgError, ValueError):
    pass


# graph construction / analysis
class SelfDependency(ExgError):
    pass


class SamePair(ExgError, ValueError):
    pass


class EmptySet(ExgError, ValueError):
    pass


class EmptyGraph(ExgError, ValueError):
    pass


class NotADag(ExgError):
    pass


class InvalidPartition(ExgError, ValueError):
    pass


class TooLarge(ExgError):
    pass


class InvariantViolation(ExgError):
    """An internal consistency check failed (a bug, not bad input)."""
