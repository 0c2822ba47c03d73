"""Exception types shared across the package."""


class DfRelayError(Exception):
    """Base class for all package errors."""


class DomainError(DfRelayError, ValueError):
    """Argument outside the domain where an expression is defined."""


class AccuracyError(DfRelayError, ArithmeticError):
    """A series or quadrature did not reach the requested tolerance.

    Attributes
    ----------
    partial : float
        Best estimate available when evaluation stopped.
    n_terms : int
        Number of terms (or subintervals) consumed.
    """

    def __init__(self, message, partial=float("nan"), n_terms=0):
        super().__init__(message)
        self.partial = partial
        self.n_terms = n_terms


class InfeasibleError(DfRelayError):
    """A target cannot be met under the given constraints.

    ``required`` carries the quantity that would have been needed
    (for example the source power in watts), when it is known.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
