"""Exception types shared across the package."""


class ConstraintError(ValueError):
    """A combinatorial precondition (e.g. parts summing to the target) failed."""


class AssemblyError(ValueError):
    pass


class PotentialError(ValueError):
    """The affine potential is negative somewhere on the grid."""


class AdmissibilityError(ValueError):
    """(d, p) outside the admissible set for the requested quantity."""


class SolverError(RuntimeError):
    pass


class IterationLimitError(SolverError):
    """Raised when an iteration hits max_iters; ``best`` carries the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PositivityError(SolverError):
    pass


class GapError(SolverError):
    pass


class StencilError(ValueError):
    """A finite-difference stencil point leaves the parameter box."""


class IntegrandError(RuntimeError):
    """An integrand evaluation failed inside a QMC run; ``partial`` holds completed shift values."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class LatticeError(ValueError):
    """Lattice-rule precondition failed (e.g. non-prime N where primality is required)."""
