"""Exception hierarchy shared by all modules."""


class ShiftConvError(Exception):
    """Base class for errors raised by this package."""


class ContractViolation(ShiftConvError, ValueError):
    """An argument violates a documented precondition."""


class PoleError(ShiftConvError, ZeroDivisionError):
    """Evaluation requested at (or numerically too close to) a pole."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ResourceError(ShiftConvError, MemoryError):
    """A table or lattice sum would exceed the configured memory budget."""

    def __init__(self, message, limit=None, requested=None):
        super().__init__(message)
        self.limit = limit
        self.requested = requested


class BudgetError(ShiftConvError):
    """A truncation cannot meet the requested tail bound at the given cutoff."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class RegionError(ShiftConvError, ValueError):
    """Parameters lie outside the region where a series or sum converges."""


class UnsupportedRegionError(RegionError):
    """No implemented evaluation path covers the requested parameters."""


class ConditioningError(ShiftConvError, ValueError):
    """A least-squares design matrix is (numerically) rank deficient."""


class DivergenceError(RegionError):
    """A series or lattice sum is requested outside its region of absolute convergence."""
