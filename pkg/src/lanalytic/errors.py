"""Exception hierarchy shared by all modules."""


class LAnalyticError(Exception):
    """Base class for all errors raised by :mod:`lanalytic`."""


class NotSecondOrder(LAnalyticError):
    """The coefficient of the pure x-derivative vanishes."""


class Degenerate(LAnalyticError):
    """A real-linear map or a discriminant evaluation is degenerate."""


class NotElliptic(LAnalyticError):
    """The operator has a (numerically) real characteristic root."""


class ReductionDegenerate(LAnalyticError):
    """The canonical parameter is too close to 1 to be usable."""


class InvalidDegree(LAnalyticError, ValueError):
    pass


class UnivalenceViolation(LAnalyticError, ValueError):
    """Parameters of a conformal map family fail the univalence guard."""


class PoleAtCenter(LAnalyticError, ZeroDivisionError):
    pass


class OutsideDomain(LAnalyticError, ValueError):
    """A point is not strictly inside the boundary curve."""


class QuadratureNotConverged(LAnalyticError):
    pass


class ConstraintInfeasible(LAnalyticError):
    pass


class DegreeOrder(LAnalyticError, ValueError):
    pass


class AnnulusOverlap(LAnalyticError):
    """The annuli used for the lower bound are not pairwise disjoint."""


class RankDeficientWarning(UserWarning):
    """Sampled basis lost columns at the drop tolerance; the fit still ran."""
