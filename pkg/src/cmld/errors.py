"""Exception hierarchy shared across the package."""


class CmldError(Exception):
    """Base class for all package errors."""


class DomainError(CmldError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class FeasibilityError(CmldError, ValueError):
    """A profile or endpoint pair violates a feasibility condition.

    The message names the violated condition explicitly.
    """


class PreconditionError(CmldError, ValueError):
    """A structural precondition on a path or record does not hold."""


class ParityError(CmldError, ValueError):
    """A degree sequence has an odd half-edge total."""


class FitError(CmldError, ValueError):
    """Not enough usable points to fit a decay rate."""


class StateError(CmldError, RuntimeError):
    """An operation was applied to an incomplete or inconsistent record."""
