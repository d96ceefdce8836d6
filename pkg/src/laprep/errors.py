"""Exception hierarchy shared by all laprep modules."""


class LaprepError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(LaprepError, ValueError):
    pass


class NotSymmetric(LaprepError, ValueError):
    pass


class NoConvergence(LaprepError, RuntimeError):
    pass


class Singular(LaprepError, ValueError):
    pass


class NotOrthonormal(LaprepError, ValueError):
    pass


class InvalidSize(LaprepError, ValueError):
    pass


class TooManyWalls(LaprepError, ValueError):
    pass


class Disconnected(LaprepError, ValueError):
    pass


class NotStochastic(LaprepError, ValueError):
    pass


class NotErgodic(LaprepError, ValueError):
    pass


class NotStationary(LaprepError, ValueError):
    pass


class AsymmetryTooLarge(LaprepError, ValueError):
    pass


class Degenerate(LaprepError, ValueError):
    """Zero eigenvalue with multiplicity > 1: the transition graph is disconnected."""


class TooLarge(LaprepError, ValueError):
    pass


class RankDeficient(LaprepError, ValueError):
    pass


class Diverged(LaprepError, RuntimeError):
    pass


class DegenerateGap(LaprepError, ValueError):
    pass


class NegativeEpsilon(LaprepError, ValueError):
    pass


class InvariantViolated(LaprepError, AssertionError):
    """A proven inequality failed numerically. Always an implementation bug."""


class SchemaError(LaprepError, ValueError):
    pass
