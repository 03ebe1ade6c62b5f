"""Exception types shared across the package."""


class RopackError(Exception):
    """Base class for all package errors."""


class ParameterError(RopackError, ValueError):
    """An argument is outside its documented domain."""


class CapabilityError(RopackError):
    """The request exceeds a configured solver or enumeration cap."""


class ContractError(RopackError):
    """A precondition of a bound or formula does not hold."""
