"""Exception hierarchy shared by every module."""


class PersuasionBoundsError(ValueError):
    """Base class for domain errors raised by this package."""


class NotADistribution(PersuasionBoundsError):
    pass


class BoundaryCell(PersuasionBoundsError):
    pass


class DegenerateDenominator(PersuasionBoundsError):
    pass


class InconsistentWithAssumptions(PersuasionBoundsError):
    pass


class SharesNotCovered(PersuasionBoundsError):
    pass


class EmptyRegion(PersuasionBoundsError):
    pass


class InconsistentLatent(PersuasionBoundsError):
    pass


class EmptyArm(PersuasionBoundsError):
    pass


class UnknownColumn(PersuasionBoundsError):
    pass


class TooFewClusters(PersuasionBoundsError):
    pass


class InconsistentPanel(PersuasionBoundsError):
    pass


class DomainError(PersuasionBoundsError):
    pass


class NoRoot(PersuasionBoundsError):
    pass


class InvalidSpec(PersuasionBoundsError):
    pass
