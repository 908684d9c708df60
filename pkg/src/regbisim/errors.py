"""Exception types shared by the checkers and the command line."""


class RegBisimError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(RegBisimError, ValueError):
    """Bad input to an operation (wrong discipline, malformed argument, ...)."""


class CapacityError(RegBisimError):
    """The requested explicit computation exceeds a configured size cap."""


class CertificateError(RegBisimError):
    """A generating-system certificate is structurally malformed."""
