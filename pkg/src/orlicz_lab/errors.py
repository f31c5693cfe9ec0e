"""Exception hierarchy shared by all modules.

Every numerical failure derives from :class:`NumericalError` so the CLI can
map it to a single exit code; invalid user input derives from
:class:`InputError`.
"""


class OrliczLabError(Exception):
    """Base class for all package errors."""


class InputError(OrliczLabError, ValueError):
    """Invalid parameters or configuration."""


class DomainError(InputError):
    """Argument outside the domain of a function or tabulation."""


class PreconditionError(OrliczLabError):
    """A mathematical precondition of an operation does not hold."""


class NumericalError(OrliczLabError, ArithmeticError):
    """Base class for failures of a numerical method."""


class ConvergenceError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class SolverError(NumericalError):
    pass


class DivergenceError(NumericalError):
    """A fixed-point iteration whose increments keep growing."""


class OverflowGuard(NumericalError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class GridError(InputError):
    pass


class MaskError(InputError):
    pass


class GeometryError(InputError):
    pass


class AlignmentError(InputError):
    pass


class EllipticityError(InputError):
    pass


class SingularityError(DomainError):
    pass
