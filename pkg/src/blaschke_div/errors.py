"""Exception hierarchy.

Every error raised by the library derives from one of three bases, which the
command line maps onto exit codes: ``ValidationError`` (2),
``NumericalFailure`` (3) and ``BudgetExceeded`` (4).
"""


class BlaschkeDivError(Exception):
    """Root of the library's exceptions."""


class ValidationError(BlaschkeDivError, ValueError):
    """Input violates a precondition."""


class NumericalFailure(BlaschkeDivError, ArithmeticError):
    """A solver did not reach its target."""


class BudgetExceeded(BlaschkeDivError, RuntimeError):
    """A work budget ran out before an answer was certified."""


# divisors
class PointOutsideClosedDisk(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


# Blaschke products
class BoundaryZero(ValidationError):
    pass


class PoleHit(ValidationError):
    pass


class RootFindingFailed(NumericalFailure):
    pass


class ContinuationStalled(NumericalFailure):
    pass


class ResidualTooLarge(NumericalFailure):
    pass


class OneInEscapedSupport(ValidationError):
    pass


class CompactSetHitsEscapedSupport(ValidationError):
    pass


# schemes
class DegenerateCycle(ValidationError):
    pass


# model dynamics
class ZeroMultiplier(ValidationError):
    pass


class OutsideLinearizationReach(ValidationError):
    pass


class NotPreperiodic(ValidationError):
    pass


class FundamentalArcHitsCriticalOrbit(NumericalFailure):
    pass


class RootCountNotOne(NumericalFailure):
    pass


class NewtonDiverged(NumericalFailure):
    pass


class SignConditionViolated(ValidationError):
    pass


class SubdivisionBudgetExceeded(BudgetExceeded):
    pass


class RayTrackingFailed(NumericalFailure):
    pass


class ArcPlacementError(ValidationError):
    pass


# polynomial dynamics
class InsidePullbackRegion(ValidationError):
    pass


class RayBifurcation(NumericalFailure):
    pass


class NoLandingAtBudget(BudgetExceeded):
    pass


class BranchEscape(NumericalFailure):
    pass


class DegenerateFit(NumericalFailure):
    pass


# parabolic
class DegenerateChain(ValidationError, ZeroDivisionError):
    pass


class NotInPetal(ValidationError):
    pass


class DegenerateJet(ValidationError):
    pass


class ChartOverlapEmpty(NumericalFailure):
    pass


class GateNotCrossed(NumericalFailure):
    pass


class SectorViolated(ValidationError):
    pass


# dimension
class BracketDoesNotStraddle(NumericalFailure):
    pass


class EigenvalueNotConverged(NumericalFailure):
    pass


class OriginInDomain(ValidationError):
    pass


class DepthBudgetExceeded(BudgetExceeded):
    pass
