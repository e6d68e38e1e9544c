"""Exception types shared across the package."""


class HsvcError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(HsvcError, ValueError):
    """A parameter combination is structurally invalid."""


class OutOfRangeError(ParameterError):
    """A rank or index lies outside the valid range for its object."""


class ConfigError(HsvcError, ValueError):
    """A configuration file is malformed or inconsistent."""


class SingularSystemError(HsvcError, ValueError):
    """A least-squares subproblem is rank deficient."""


class DecodeFailure(HsvcError):
    """The received signal cannot be mapped back to a valid codeword."""
