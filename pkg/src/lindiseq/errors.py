"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operands live in different groups or have mismatched lengths."""


class CapacityError(RuntimeError):
    """The requested enumeration exceeds a configured size cap."""


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


class InsufficientSamplesError(PreconditionError):
    def __init__(self, required, given):
        super().__init__(f"need at least {required} samples, got {given}")
        self.required = required
        self.given = given


class StructureError(ValueError):
    """A subgroup basis is inconsistent with the subgroup it claims to describe."""


class InconsistencyError(RuntimeError):
    """Decision subcalls returned answers that no single source could produce.

    This is the probabilistic failure mode of the search reduction; rerunning
    with a fresh seed is the intended recovery.
    """
