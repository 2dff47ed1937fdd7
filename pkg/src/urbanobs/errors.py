"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class Error(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(Error):
    """Invalid configuration: bad catalog entry, rule line, cadence window."""


class OutOfRangeError(Error):
    """A value falls outside the scale a computation is defined on."""


class ParseError(Error):
    """A source payload does not match its declared format.

    Carries enough position information to point an operator at the
    offending line of the payload.
    """

    def __init__(self, message: str, *, origin: str | None = None,
                 line_no: int | None = None) -> None:
        self.origin = origin
        self.line_no = line_no
        where = ""
        if origin is not None:
            where += f" [{origin}"
            if line_no is not None:
                where += f":{line_no}"
            where += "]"
        elif line_no is not None:
            where += f" [line {line_no}]"
        super().__init__(message + where)


class ConflictError(Error):
    """Two source cells claim the same (station, hour, contaminant) slot."""


class PreconditionError(Error):
    """A function was handed inputs it is documented not to accept."""


class RecordRejected(Error):
    """Validation dropped the whole candidate record.

    Raised when the defect is structural (missing timestamp, unresolved
    location, broken hour) rather than a single bad field. The attached
    report lists what was wrong.
    """

    def __init__(self, message: str, report=None) -> None:
        self.report = report
        super().__init__(message)


class StorageError(Error):
    """Base class for persistent-store failures."""


class MigrationRequired(StorageError):
    """An existing table does not match the expected column layout."""


class ReferentialError(StorageError):
    """A record points at a location or lookup code the store does not hold."""


class QueryError(StorageError):
    """A query names an attribute or table that does not exist."""


class StorageUnavailable(StorageError):
    """The store cannot be reached at all; a run cannot continue."""


class SourceError(Error):
    """A source could not produce a payload for the requested target."""


class RunAborted(Error):
    """A collection run stopped early; carries the partial summary."""

    def __init__(self, message: str, summary=None) -> None:
        self.summary = summary
        super().__init__(message)
