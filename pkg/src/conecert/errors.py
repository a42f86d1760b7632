"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Matrix or vector dimensions are inconsistent with the problem."""


class NotSimple(ValueError):
    """Cone matrix is not full column rank, so the cone is not simple."""


class ZeroRow(ValueError):
    """Cone matrix contains a row of zeros."""


class NumericalFailure(RuntimeError):
    """The LP solver lost precision or could not classify the problem."""


class RankLost(RuntimeError):
    """A cone update destroyed full column rank."""


class ModeViolation(ValueError):
    """A certificate does not satisfy the precondition of the requested check mode."""


class NonFinite(RuntimeError):
    """A simulated trajectory left the range of finite floats."""


class DegenerateFit(RuntimeError):
    """Trajectory data is unusable for rate estimation (underflow or zeros)."""


class UnknownExample(ValueError):
    """Requested reproduction id does not exist."""


class ProblemFormatError(ValueError):
    """A problem file or certificate document fails schema validation."""
