"""Exception hierarchy shared by every module of the package."""


class MrfError(Exception):
    """Base class for all errors raised by :mod:`mrfpareto`."""


class ValidationError(MrfError, ValueError):
    """Malformed model or configuration input."""


class DimensionMismatch(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


class SubsetTooSmall(ValidationError):
    pass


class DegeneratePair(ValidationError):
    pass


class PortfolioTooLarge(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    pass


class InfiniteMean(MrfError, ArithmeticError):
    """The requested expectation does not exist (power parameter too small)."""


class NumericalError(MrfError, ArithmeticError):
    """A series, recursion or root search failed to deliver the requested accuracy."""


class DivergentSeries(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class TruncationBudgetExceeded(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass


class EmptyTail(MrfError, ValueError):
    """No Monte Carlo replications fell beyond the requested threshold."""
