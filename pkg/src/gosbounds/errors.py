"""Exception hierarchy shared by every module of the package."""


class GosBoundsError(Exception):
    """Base class for all errors raised by gosbounds."""


class InvalidParameters(GosBoundsError, ValueError):
    pass


class NonPositiveGamma(InvalidParameters):
    pass


class EmptyVector(InvalidParameters):
    pass


class InvalidModelParameters(InvalidParameters):
    pass


class DomainError(GosBoundsError, ValueError):
    pass


class WrongCase(GosBoundsError):
    """The parameters fall outside the regime handled by the called routine."""


class UnsupportedByTheory(GosBoundsError):
    """No optimal bound is available for these parameters."""


class NumericalFailure(GosBoundsError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class NoSignChange(NumericalFailure):
    pass


class RootNotFound(NumericalFailure):
    pass


class NegativeCSquared(NumericalFailure):
    pass


class DenominatorNonpositive(NumericalFailure):
    def __init__(self, message, alpha=None):
        super().__init__(message)
        self.alpha = alpha


class NoInflectionPoint(NumericalFailure):
    pass


class NoBetaHat(NumericalFailure):
    pass


class NonMonotoneBranch(NumericalFailure):
    pass


class NonFiniteSample(NumericalFailure):
    pass


class ConditionFails(WrongCase):
    """The DFRA admissibility condition does not hold."""


class InvalidCoefficients(InvalidParameters):
    pass
