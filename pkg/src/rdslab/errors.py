"""Exception types shared across the package."""


class RdslabError(Exception):
    """Base class for all package errors."""


class ConfigError(RdslabError, ValueError):
    """An input value or configuration document is invalid.

    The message names the offending field and the violated bound.
    """


class SamplingError(RdslabError, RuntimeError):
    """The referral process could not be started or continued."""


class EstimationError(RdslabError, RuntimeError):
    """An estimator could not produce a value for this sample.

    Attributes
    ----------
    code : str
        Stable machine-readable failure token.
    partial : object or None
        Last iterate for iterative procedures that failed to converge.
    """

    def __init__(self, message: str, code: str = "estimation_error", partial=None):
        super().__init__(message)
        self.code = code
        self.partial = partial
