"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """An argument violates a documented precondition."""


class BoundaryContamination(RuntimeError):
    """The field does not decay near the edge of the periodic box."""


class SolverAbort(RuntimeError):
    """A time integrator had to stop before reaching the final time."""


class NonContraction(SolverAbort):
    """Picard iterates stopped contracting."""
