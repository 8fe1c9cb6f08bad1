"""Exception hierarchy shared by the library and the CLI."""


class WcascError(Exception):
    """Base class for all errors raised by this package."""


class InputError(WcascError, ValueError):
    """Invalid argument or invalid model data."""


class InconsistentObservation(InputError):
    """A partial realization agrees with no realization in the support."""


class MissingTableEntry(InputError):
    """A table utility was evaluated on a pattern it does not store."""


class MalformedPolicy(InputError):
    """A policy tree has no branch for a state that was observed."""


class Infeasible(WcascError):
    """The requested goal or budget cannot be met."""


class TooLarge(WcascError):
    """An exhaustive enumeration would exceed its configured cap."""


class MinimalDependencyRequired(WcascError):
    """A brute-force oracle was asked to run on a non-minimal-dependent utility."""


class ParseError(InputError):
    """Instance file could not be parsed; carries a diagnostic code and position."""

    def __init__(self, code: str, message: str, line: int = 0, column: int = 0):
        self.code = code
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{code}: {message}")
