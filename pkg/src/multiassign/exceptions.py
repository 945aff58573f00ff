"""Exception types shared across the package."""


class MultiAssignError(Exception):
    """Base class for all package errors."""


class AccessStructureError(MultiAssignError, ValueError):
    """An access structure is malformed or inconsistent for the requested operation."""


class CapacityError(MultiAssignError, ValueError):
    """The participant count exceeds an enumeration or set-algebra cap."""


class MapError(MultiAssignError, ValueError):
    """An assignment map violates its own invariants or does not fit the structure."""


class SolverError(MultiAssignError, RuntimeError):
    """The integer programming solver could not produce a usable result."""


class FieldError(MultiAssignError, ValueError):
    """Bad finite-field parameters or share data."""


class BudgetExceeded(MultiAssignError, RuntimeError):
    """An exhaustive computation would exceed its configured budget."""


class ReconstructionRefused(MultiAssignError):
    """Too few primitive shares were pooled to recover the secret.

    ``have`` and ``need`` give the pooled and required primitive share counts.
    """

    def __init__(self, have, need):
        self.have = have
        self.need = need
        super().__init__(
            f"refusing to reconstruct: pooled {have} distinct primitive shares, "
            f"need {need} (short by {need - have})"
        )
