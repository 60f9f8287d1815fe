"""Exception types raised across the package."""

from __future__ import annotations


class RcaTestError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(RcaTestError, ValueError):
    """Invalid or inconsistent model / procedure parameters."""


class DegenerateSeriesError(RcaTestError):
    """A statistic is undefined for this series (zero variation somewhere)."""


class PsiUndefinedError(DegenerateSeriesError):
    """The residual skewness-correlation estimate does not exist.

    Raised when either the residual variance or the variance of the
    centered squared residuals is zero, so the normalizing denominator
    vanishes.  This is an explicit error state rather than a NaN.
    """


class ModificationError(RcaTestError):
    """The orthogonalizing transform of squared residuals cannot be applied."""


class RankDeficiencyError(DegenerateSeriesError):
    """The two-regressor design is (numerically) collinear."""


class TableError(RcaTestError):
    """A lookup table is malformed, incomplete, or queried out of range."""


class CalibrationError(RcaTestError):
    """Level calibration found no feasible candidate.

    The ``diagnostics`` attribute holds the worst-case rejection rate per
    candidate level so the failure can be inspected.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IngestError(RcaTestError):
    """Input data could not be turned into a usable series."""
