"""Exception hierarchy.

Two families matter to callers: ``ContractError`` for bad input or violated
preconditions, ``NumericalError`` for computations that could not meet their
accuracy or progress guarantees.  The CLI maps them to exit codes 2 and 3.
"""


class BlaschkeError(Exception):
    """Base class for all package errors."""


class ContractError(BlaschkeError, ValueError):
    """A precondition or input validation failed."""


class NumericalError(BlaschkeError, ArithmeticError):
    """A numerical routine failed to reach its guarantee."""


class InvalidInputError(ContractError):
    pass


class PoleProximityError(ContractError):
    pass


class DegenerateInputError(ContractError):
    pass


class FullCircleError(ContractError):
    pass


class InfeasibleError(ContractError):
    pass


class InvalidGeometryError(ContractError):
    pass


class UnknownPropertyError(ContractError):
    pass


class NotExpandingError(ContractError):
    """The product is (numerically) a rotation: min |f'| on the circle is not > 1."""


class UnboundedTailError(ContractError):
    pass


class PrecisionBudgetExceeded(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class DegenerateOrbitError(NumericalError):
    pass


class ConstructionStall(NumericalError):
    """An arc shrink or block search inside a nested construction failed."""

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class ContractionFailure(NumericalError):
    pass


class StallError(NumericalError):
    """Residuals stopped decreasing; ``trace`` holds everything computed so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CalibrationFailure(NumericalError):
    pass


class NonConvergentInputWarning(UserWarning):
    """Partial sums did not pass the Cauchy check at the probed depths."""
