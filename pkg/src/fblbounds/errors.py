"""Exception hierarchy.

Two families matter to callers: precondition failures (bad input, or a
request outside the range where a formula is defined) and numerical
failures (a solver that did not converge).  The CLI maps them to exit
codes 2 and 3.
"""


class FBLError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class PreconditionError(FBLError, ValueError):
    """Input or parameter outside the domain of the requested operation."""

    code = "precondition"


class NumericalError(FBLError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""

    code = "numerical"


class OutOfRange(PreconditionError):
    code = "OutOfRange"


class DimensionMismatch(PreconditionError):
    code = "DimensionMismatch"


class Unsupported(PreconditionError):
    code = "Unsupported"


class NotSymmetric(PreconditionError):
    code = "NotSymmetric"


class UnsupportedSupport(PreconditionError):
    code = "UnsupportedSupport"


class DegenerateVariance(PreconditionError):
    code = "DegenerateVariance"


class BerryEsseenDominates(PreconditionError):
    """Block length too small for the Berry-Esseen sandwich to be defined."""

    code = "BerryEsseenDominates"


class OutOfUniqueRange(PreconditionError):
    code = "OutOfUniqueRange"


class EmptyFeasibleRegion(PreconditionError):
    code = "EmptyFeasibleRegion"


class TooLarge(PreconditionError):
    code = "TooLarge"


class BracketFailed(NumericalError):
    code = "BracketFailed"


class NotConverged(NumericalError):
    code = "NotConverged"
