"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the supported domain of an operation."""


class DegeneracyError(DomainError):
    """The hypergeometric eigenfunction form is singular at integer lambda."""


class AccuracyError(ArithmeticError):
    """A numerical procedure failed to reach its requested tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(ValueError):
    """A likelihood maximum sits on the edge of the search bracket."""
