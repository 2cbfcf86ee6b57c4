"""Exception types raised by the belief and surprise routines."""


class SmileError(ValueError):
    """Base class for numerical errors in this package."""


class DegenerateLikelihoodError(SmileError):
    """A likelihood row with no positive entry cannot be normalized."""


class InfiniteDivergenceError(SmileError):
    """KL divergence is infinite because the support condition fails."""


class InfiniteSurpriseError(SmileError):
    """The observation has zero probability under every supported model."""


class DegeneratePosteriorError(SmileError):
    """An update produced an all-zero unnormalized belief."""


class SolverError(SmileError):
    """Bisection did not reach the requested tolerance.

    The final bracket is kept on the exception for inspection.
    """

    def __init__(self, message, lo=None, hi=None, residual=None):
        super().__init__(message)
        self.lo = lo
        self.hi = hi
        self.residual = residual


class DomainError(SmileError):
    """Argument outside the domain of a special function."""
