"""Exception hierarchy.

Every error raised by the package derives from :class:`AlphaDivError`, and
input-shaped errors also derive from :class:`ValueError` so callers that
only care about bad arguments can catch that.
"""


class AlphaDivError(Exception):
    """Base class for all package errors."""


# measures
class LengthMismatch(AlphaDivError, ValueError):
    pass


class WeightSumInvalid(AlphaDivError, ValueError):
    pass


class NegativeWeight(AlphaDivError, ValueError):
    pass


class NonFinitePoint(AlphaDivError, ValueError):
    pass


class TOutOfRange(AlphaDivError, ValueError):
    pass


# divergences / bounds
class InvalidOrder(AlphaDivError, ValueError):
    pass


class EqualMeans(AlphaDivError, ValueError):
    pass


class InternalConsistencyError(AlphaDivError, ArithmeticError):
    """A computed quantity left its mathematically admissible range."""


# relations
class InfiniteDivergence(AlphaDivError, ValueError):
    pass


class StepTooLarge(AlphaDivError, ValueError):
    pass


class QuadratureNonConvergence(AlphaDivError, ArithmeticError):
    pass


class DegeneratePath(AlphaDivError, ValueError):
    pass


# oracle
class SingularSystem(AlphaDivError, ValueError):
    pass


class NoFeasiblePoint(AlphaDivError, RuntimeError):
    pass


class DeltaInvalid(AlphaDivError, ValueError):
    pass


class ScanFailed(AlphaDivError, RuntimeError):
    pass


class JTooSmall(AlphaDivError, ValueError):
    pass
