"""Exception types raised by the ehscn package.

Every error that callers are expected to handle derives from EhscnError so
the service layer can map the whole family to structured HTTP responses.
"""


class EhscnError(Exception):
    """Base class for all package errors."""


class TraceParseError(EhscnError):
    """A trace record could not be parsed.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class TraceOrderingError(EhscnError):
    """Trace timestamps are not strictly increasing."""


class InsufficientDataError(EhscnError):
    """Fewer than two usable records, so no resolution can be inferred."""


class AlignmentError(EhscnError):
    """Two traces (or a trace and a grid) do not line up."""


class DegenerateTraceError(EhscnError):
    """Operation undefined on this trace (all-zero peak, zero variance)."""


class NoCoverageError(EhscnError):
    """Users exist but there is no base station to associate them with."""


class UndefinedOutageError(EhscnError):
    """No user-slot was simulated, so outage probability is undefined."""


class InvalidScheduleError(EhscnError):
    """A transmission schedule violates shape, energy, or power constraints."""


class InstanceTooLargeError(EhscnError):
    """Problem instance exceeds the size cap of an exhaustive solver."""


class ConfigError(EhscnError):
    """A configuration value is missing or out of range.

    Carries the offending key path.
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
