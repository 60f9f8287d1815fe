"""Residuals, moment estimates, and the autoregression t-ratio.

All quantities are method-of-moments sums with ``1/T`` scaling (no
degrees-of-freedom corrections anywhere).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSeriesError, ParameterError, PsiUndefinedError
from .simulate import Series

__all__ = [
    "Residuals",
    "NuisanceEstimates",
    "RhoEstimate",
    "residuals",
    "nuisance_estimates",
    "rho_ols",
    "t_rho",
]

_PSI_CLAMP = 1.0 - 1e-12


def _values(y) -> np.ndarray:
    if isinstance(y, Series):
        return y.values
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ParameterError("need a 1-D series of length >= 2")
    return arr


@dataclass(frozen=True)
class Residuals:
    """One-step-ahead residuals ``z[t] = y[t] - rho*y[t-1]``."""

    z: np.ndarray
    rho_used: float


@dataclass(frozen=True)
class NuisanceEstimates:
    """Moment estimates of the innovation scale and skew-link.

    ``sigma_eps2`` is the mean squared residual, ``sigma_eta2`` the variance
    of the squared residuals around that mean, and ``psi_hat`` the
    correlation-type ratio linking residuals and their centered squares.
    ``psi_hat`` raises :class:`PsiUndefinedError` when either variance is
    zero — the undefined state is an error, never a NaN.
    """

    sigma_eps2: float
    sigma_eta2: float
    psi: float | None = field(default=None, repr=False)

    @property
    def psi_defined(self) -> bool:
        return self.psi is not None

    @property
    def psi_hat(self) -> float:
        if self.psi is None:
            raise PsiUndefinedError(
                "psi_hat is undefined: sigma_eps2 or sigma_eta2 is zero"
            )
        return self.psi

    @property
    def sigma_eps(self) -> float:
        return math.sqrt(self.sigma_eps2)

    @property
    def sigma_eta(self) -> float:
        return math.sqrt(self.sigma_eta2)


def residuals(y, rho: float) -> Residuals:
    """Residuals of ``y`` against ``rho`` times its lag."""
    vals = _values(y)
    return Residuals(z=vals[1:] - rho * vals[:-1], rho_used=float(rho))


def nuisance_estimates(z) -> NuisanceEstimates:
    """Estimate ``(sigma_eps2, sigma_eta2, psi_hat)`` from residuals.

    Accepts a :class:`Residuals` or a plain array.  Estimates numerically
    outside ``[-1, 1]`` (possible only through rounding) are clamped to
    ``±(1 - 1e-12)`` with a warning.
    """
    arr = z.z if isinstance(z, Residuals) else np.asarray(z, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ParameterError("need a 1-D residual array")
    z2 = arr * arr
    s_eps2 = float(z2.mean())
    dev = z2 - s_eps2
    s_eta2 = float((dev * dev).mean())
    # ``dev`` carries absolute rounding error of order eps * s_eps2 per
    # element, so an s_eta2 below (a few eps * s_eps2)**2 is numerical dust
    # from an (effectively) constant z**2, not signal: psi is undefined.
    if s_eps2 <= 0.0 or s_eta2 <= (8.0 * np.finfo(float).eps * s_eps2) ** 2:
        return NuisanceEstimates(s_eps2, s_eta2, psi=None)
    # The product s_eps2 * s_eta2 can underflow to zero even when both
    # factors are positive (series at scales around 1e-80 and below); a
    # product of two positive square roots cannot, so split the root when
    # the product leaves the normal range.
    prod = s_eps2 * s_eta2
    if prod >= np.finfo(float).tiny:
        denom = math.sqrt(prod)
    else:
        denom = math.sqrt(s_eps2) * math.sqrt(s_eta2)
    psi = float((arr * dev).mean()) / denom
    if abs(psi) > 1.0:
        warnings.warn(
            f"psi_hat = {psi!r} fell outside [-1, 1] by rounding; clamping",
            RuntimeWarning,
            stacklevel=2,
        )
        psi = math.copysign(_PSI_CLAMP, psi)
    return NuisanceEstimates(s_eps2, s_eta2, psi=psi)


@dataclass(frozen=True)
class RhoEstimate:
    """Least-squares autoregressive coefficient with its t-ratio scale.

    ``t_ratio(rho_bar)`` returns
    ``(rho_hat - rho_bar) * sqrt(sum(y[t-1]**2) / sigma_eps2)`` with the
    residual variance evaluated at ``rho_hat``; it is affine in ``rho_bar``.
    """

    rho_hat: float
    sum_lag_sq: float
    sigma_eps2: float

    @property
    def scale(self) -> float:
        if self.sigma_eps2 <= 0.0:
            raise DegenerateSeriesError(
                "t-ratio undefined: residual variance at rho_hat is zero"
            )
        return math.sqrt(self.sum_lag_sq / self.sigma_eps2)

    def t_ratio(self, rho_bar):
        """t-ratio against one or many hypothesized coefficients."""
        rho_bar = np.asarray(rho_bar, dtype=float)
        out = (self.rho_hat - rho_bar) * self.scale
        return float(out) if out.ndim == 0 else out


def rho_ols(y) -> RhoEstimate:
    """Least-squares fit of ``y[t]`` on ``y[t-1]`` (no intercept)."""
    vals = _values(y)
    lag, cur = vals[:-1], vals[1:]
    den = float(lag @ lag)
    if den == 0.0:
        raise DegenerateSeriesError("all lagged values are zero; rho_hat undefined")
    rho_hat = float(lag @ cur) / den
    z = cur - rho_hat * lag
    return RhoEstimate(rho_hat=rho_hat, sum_lag_sq=den, sigma_eps2=float(z @ z) / z.size)


def t_rho(y, rho_bar: float) -> float:
    """Convenience wrapper: ``rho_ols(y).t_ratio(rho_bar)``."""
    return rho_ols(y).t_ratio(rho_bar)
