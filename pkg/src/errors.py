"""
ncdir.src.errors

Exception hierarchy shared by the numerics, sampling and reporting modules.
"""

from typing import Optional


class NcDirError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NcDirError, ValueError):
    """An argument violates a precondition or a type invariant."""


class BadParameter(DomainError):
    """A series parameter is inadmissible (pole or divergent series)."""


class NonConvergent(NcDirError, ArithmeticError):
    """
    A series reached its term budget without meeting the guard criterion.

    Attributes
    ----------
    series : str
        Name of the series being summed.
    terms : int
        Number of terms (or degree layers) evaluated.
    last_term : float
        Magnitude of the last term added.
    partial_sum : float
        Accumulated sum when the budget ran out.
    """

    def __init__(
        self,
        series: str,
        terms: int,
        last_term: float,
        partial_sum: float,
        hint: Optional[str] = None,
    ):
        self.series = series
        self.terms = terms
        self.last_term = last_term
        self.partial_sum = partial_sum
        message = (
            f"{series} did not converge after {terms} terms "
            f"(last term {last_term:.3e}, partial sum {partial_sum:.17g})"
        )
        if hint:
            message = f"{message}; {hint}"
        super().__init__(message)

    @property
    def diagnostics(self) -> dict:
        return {
            "series": self.series,
            "terms": self.terms,
            "last_term": self.last_term,
            "partial_sum": self.partial_sum,
        }


class SamplingError(NcDirError, RuntimeError):
    """Boundary resampling exhausted its retry budget."""


class ConsistencyError(NcDirError, AssertionError):
    """Two formulas that must agree produced different values."""
