"""Exception types shared across the package.

The CLI maps these onto exit codes, so anything user-facing should
raise one of them rather than a bare ValueError.
"""


class BugnavError(Exception):
    """Base class for everything raised on purpose."""


class ValidationError(BugnavError):
    """Bad input: malformed query, out-of-range argument, unreadable file."""


class QueryConstructionError(BugnavError):
    """No search strategy could produce a usable query for the issue."""


class NoCandidatesError(BugnavError):
    """Every strategy ran and the platform returned nothing."""


class TransportError(BugnavError):
    """Network or fixture layer failed in a way retries did not fix."""


class NotFoundError(TransportError):
    """The platform says the requested object does not exist."""


class RateLimitError(TransportError):
    """Request budget exhausted after the allowed retries."""

    def __init__(self, message, retry_after=None):
        super().__init__(message)
        self.retry_after = retry_after


class ReplayMissError(TransportError):
    """Replay mode got a request the fixture set has no recording for."""

    def __init__(self, message, endpoint=None, params=None):
        super().__init__(message)
        self.endpoint = endpoint
        self.params = params
