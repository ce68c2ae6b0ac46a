"""Exception hierarchy shared across the package."""


class GridTractError(Exception):
    """Base class for all package errors."""


class InfeasibleRecipeError(GridTractError):
    """A construction recipe's precondition does not hold for the given weights."""


class ResourceCapError(GridTractError):
    """A configured work, point-count, dimension or iteration cap would be exceeded."""

    def __init__(self, message, estimated_work=None):
        super().__init__(message)
        self.estimated_work = estimated_work


class CertificationError(GridTractError):
    """A constructed grid failed its independent discrepancy re-check."""
