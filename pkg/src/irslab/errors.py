"""Exception types shared by every module."""


class IrsLabError(Exception):
    """Base class for library errors."""


class DomainError(IrsLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(IrsLabError, RuntimeError):
    """A configured size or enumeration budget would be exceeded."""
