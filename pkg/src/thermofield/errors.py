class DomainError(ValueError):
    """Argument outside the domain of a function or record."""


class ConvergenceError(RuntimeError):
    """Iterative evaluation did not reach its tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class CutoffError(RuntimeError):
    """Fock truncation lost more norm than allowed."""

    def __init__(self, message, deficit=float("nan"), cutoff=None):
        super().__init__(message)
        self.deficit = deficit
        self.cutoff = cutoff


class NegativeDensityError(ArithmeticError):
    """A density came out clearly negative, not just cancellation noise."""
