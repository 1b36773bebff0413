"""Exception types raised across the package."""


class ExchangePulseError(Exception):
    """Base class for all package errors."""


class InvalidArgument(ExchangePulseError, ValueError):
    pass


class DomainViolation(ExchangePulseError, ValueError):
    """A physical parameter lies outside the range the model allows."""


class CapacityExceeded(ExchangePulseError):
    """The request needs more resources than the configuration permits.

    ``required`` carries the minimal feasible count when one is known.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class UnsupportedConfiguration(ExchangePulseError):
    pass


class SubspaceViolation(ExchangePulseError):
    """Population left the logical code space where a logical block was requested.

    Bonds inside a pair never do this. A bond joining two pairs does so
    mid-gate, so extracting a block there is a usage error.
    """


class NotConverged(ExchangePulseError):
    pass
