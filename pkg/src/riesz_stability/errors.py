"""Exception types raised across the package."""


class RieszError(Exception):
    """Base class for package errors."""


class InvalidDimensionError(RieszError, ValueError):
    pass


class UnsupportedDimensionError(RieszError, ValueError):
    pass


class InvalidKernelError(RieszError, ValueError):
    pass


class SingularConfigurationError(RieszError, ValueError):
    """Evaluation point sits on a singularity of the kernel integral."""


class QuadratureError(RieszError, RuntimeError):
    """Adaptive quadrature failed to reach its tolerance.

    ``residual`` carries the last relative change observed.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EmptySetError(RieszError, ValueError):
    """Operation needs a set of positive volume."""


class GridError(RieszError, ValueError):
    """Shape does not fit the grid, or the grid is too large to process."""


class PreconditionError(RieszError, ValueError):
    """A check was asked to run on input violating its hypotheses."""
