"""Semantic exception hierarchy shared by all persistgp modules."""


class PersistgpError(Exception):
    """Base class for all persistgp errors."""


class DomainError(PersistgpError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateHurstError(DomainError):
    """Hurst parameter falls in the degenerate band around 1/2.

    Closed-form correlation of the smooth component is a 0/0 there; use the
    half-limit correlation (corr_gstar_half) or quadrature with a Hurst value
    constructed with a smaller band half-width.
    """


class ConfigError(PersistgpError, ValueError):
    """Invalid run configuration (CLI / config file)."""


class QuadratureError(PersistgpError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the best value found and the achieved error estimate.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class SeriesError(PersistgpError):
    """A series evaluation did not converge within the term budget."""


class NotPositiveDefiniteError(PersistgpError):
    """Covariance factorization failed even after the jitter ladder."""

    def __init__(self, message, smallest_pivot=None):
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class EmbeddingNotNonnegativeError(PersistgpError):
    """Minimal circulant embedding of the covariance row has negative spectrum."""

    def __init__(self, message, min_eigenvalue=None, max_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue


class TailBudgetExceededError(PersistgpError):
    """Truncated-tail variance of a discretized kernel exceeds its budget."""

    def __init__(self, message, fraction=None, budget=None):
        super().__init__(message)
        self.fraction = fraction
        self.budget = budget


class InsufficientSurvivorsError(PersistgpError):
    """Too few positive survival counts inside the fit window."""
