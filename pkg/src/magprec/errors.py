"""Exception hierarchy for magprec."""


class MagprecError(Exception):
    """Base class for every error raised by magprec."""


class DomainError(MagprecError, ValueError):
    """An argument lies outside the domain of the formula being evaluated."""


class NonCPTPError(MagprecError, ArithmeticError):
    """An S-matrix decomposition produced a clearly negative eigenvalue."""


class DegenerateSignalError(MagprecError, ArithmeticError):
    """The signal derivative vanishes, so error propagation is undefined."""


class UnachievableSqueezingError(DomainError):
    """The requested squeezing lies below the one-axis-twisting optimum."""


class ConventionMismatchError(MagprecError):
    """A dense oracle state does not reproduce the closed-form moments."""


class NoFinitePointError(MagprecError):
    """Every point of an optimization grid was degenerate."""


class StepSizeError(DomainError):
    """The requested RK4 step count violates the stability criterion."""


class VerificationError(MagprecError):
    """A dense-oracle invariant or equivalence check failed."""
