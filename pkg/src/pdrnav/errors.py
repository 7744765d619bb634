"""Exception hierarchy.

InputError subclasses indicate problems with user-supplied data or options
(CLI exit code 2); DivergenceError indicates a numerical failure inside the
estimator (CLI exit code 3).
"""


class PdrnavError(Exception):
    """Base class for all package errors."""


class InputError(PdrnavError):
    """Invalid input data or options."""


class ParseError(InputError):
    """Malformed log or config file; message carries the offending row."""


class TimestampError(InputError):
    """Timestamps not strictly increasing, non-finite, or negative."""


class GapError(InputError):
    """Sampling gap exceeds the allowed multiple of the median interval."""


class RestProtocolError(InputError):
    """Log does not follow the stand-still head/tail recording protocol."""


class BandError(InputError):
    """Band too narrow for the given sequence lengths."""


class DivergenceError(PdrnavError):
    """Filter covariance lost positive semi-definiteness or the error state
    left the small-angle regime."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
