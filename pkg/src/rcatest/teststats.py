"""Test statistics for coefficient randomness at a given autoregressive value.

All six statistics regress (a transform of) squared residuals on the lagged
level and its square, demeaned over the sample.  The plain variants use the
raw squared residuals; the starred ("modified") variants first orthogonalize
the squared residuals against the residual level so that, at the hypothesized
coefficient, the t-type statistics are asymptotically standard normal and the
Wald statistic is chi-square with 2 degrees of freedom regardless of the
innovation skew-link.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as spstats

from .errors import (
    DegenerateSeriesError,
    ModificationError,
    ParameterError,
    RankDeficiencyError,
)
from .estimate import NuisanceEstimates, Residuals, nuisance_estimates, residuals
from .simulate import Series

__all__ = [
    "StatKind",
    "StatValue",
    "AugmentedFit",
    "modify_z2",
    "augmented_fit",
    "ln_stat",
    "aug_t_stat",
    "wald_stat",
    "pivotal_critical_value",
]

_DET_RTOL = 1e-12


class StatKind(str, enum.Enum):
    """Identifiers for the six statistic variants."""

    LN = "LN"
    LN_STAR = "LNstar"
    AUG_T = "AugT"
    AUG_T_STAR = "AugTstar"
    WALD = "Wald"
    WALD_STAR = "WaldStar"

    @property
    def modified(self) -> bool:
        return self in (StatKind.LN_STAR, StatKind.AUG_T_STAR, StatKind.WALD_STAR)

    @property
    def wald_type(self) -> bool:
        return self in (StatKind.WALD, StatKind.WALD_STAR)


@dataclass(frozen=True)
class StatValue:
    """A computed statistic together with the nuisance state behind it."""

    kind: StatKind
    value: float
    nuisance: NuisanceEstimates
    rho_used: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "sigma_eps2": self.nuisance.sigma_eps2,
            "sigma_eta2": self.nuisance.sigma_eta2,
            "psi_hat": self.nuisance.psi_hat if self.nuisance.psi_defined else None,
            "rho_used": self.rho_used,
        }


@dataclass(frozen=True)
class AugmentedFit:
    """Least-squares fit of demeaned squared residuals on the demeaned pair
    ``(y[t-1], y[t-1]**2)``."""

    delta_hat: float
    omega2_hat: float
    sigma_xi2: float
    gram: np.ndarray  # 2x2 demeaned cross-product matrix


def modify_z2(z, nuis: NuisanceEstimates) -> np.ndarray:
    """Orthogonalize squared residuals against the residual level.

    Returns ``(z**2 - sigma_eta*psi_hat*z/sigma_eps) / sqrt(1 - psi_hat**2)``.
    When ``psi_hat`` is exactly zero this is the identity on ``z**2``.
    """
    arr = z.z if isinstance(z, Residuals) else np.asarray(z, dtype=float)
    psi = nuis.psi_hat  # raises PsiUndefinedError when undefined
    if abs(psi) >= 1.0:
        raise ModificationError(f"|psi_hat| = {abs(psi)} >= 1; cannot orthogonalize")
    coef = nuis.sigma_eta * psi / nuis.sigma_eps
    return (arr * arr - coef * arr) / math.sqrt(1.0 - psi * psi)


def _design(vals: np.ndarray):
    """Demeaned lagged level and squared level."""
    lag = vals[:-1]
    lag2 = lag * lag
    return lag - lag.mean(), lag2 - lag2.mean()


def _prepare(y, rho: float, modified: bool):
    vals = y.values if isinstance(y, Series) else np.asarray(y, dtype=float)
    if vals.ndim != 1 or vals.size < 3:
        raise ParameterError("need a series of length >= 3 (T >= 2)")
    res = residuals(vals, rho)
    nuis = nuisance_estimates(res)
    w = modify_z2(res, nuis) if modified else res.z * res.z
    return vals, nuis, w


def augmented_fit(y, w) -> AugmentedFit:
    """Fit demeaned ``w`` on the demeaned pair ``(y[t-1], y[t-1]**2)``.

    The 2x2 normal equations are solved in closed form; the system is
    declared rank-deficient when the determinant falls below ``1e-12``
    relative to the product of the diagonal entries.
    """
    vals = y.values if isinstance(y, Series) else np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.shape != (vals.size - 1,):
        raise ParameterError("w must have length len(y) - 1")
    x1t, x2t = _design(vals)
    s11 = float(x1t @ x1t)
    s12 = float(x1t @ x2t)
    s22 = float(x2t @ x2t)
    det = s11 * s22 - s12 * s12
    if s11 <= 0.0 or s22 <= 0.0 or det <= _DET_RTOL * s11 * s22:
        raise RankDeficiencyError(
            "lagged level and squared level are (numerically) collinear"
        )
    # Demeaning w is unnecessary for the cross products against demeaned x.
    b1 = float(x1t @ w)
    b2 = float(x2t @ w)
    delta = (s22 * b1 - s12 * b2) / det
    omega2 = (s11 * b2 - s12 * b1) / det
    wt = w - w.mean()
    rss = float(wt @ wt) - delta * b1 - omega2 * b2
    sigma_xi2 = max(rss, 0.0) / w.size
    return AugmentedFit(
        delta_hat=delta,
        omega2_hat=omega2,
        sigma_xi2=sigma_xi2,
        gram=np.array([[s11, s12], [s12, s22]]),
    )


def ln_stat(y, rho: float, modified: bool = False) -> StatValue:
    """Score-type statistic: squared residuals against the demeaned squared lag.

    ``sum(x2t * w) / (sigma_eta * sqrt(sum(x2t**2)))`` with ``x2t`` the
    demeaned ``y[t-1]**2`` and ``w`` the (possibly modified) squared
    residuals.
    """
    vals, nuis, w = _prepare(y, rho, modified)
    _, x2t = _design(vals)
    s22 = float(x2t @ x2t)
    if s22 <= 0.0:
        raise DegenerateSeriesError("squared lag is constant; statistic undefined")
    if nuis.sigma_eta2 <= 0.0:
        raise DegenerateSeriesError("sigma_eta2 is zero; statistic undefined")
    value = float(x2t @ w) / (nuis.sigma_eta * math.sqrt(s22))
    kind = StatKind.LN_STAR if modified else StatKind.LN
    return StatValue(kind=kind, value=value, nuisance=nuis, rho_used=float(rho))


def aug_t_stat(y, rho: float, modified: bool = False) -> StatValue:
    """t-ratio on the squared-lag coefficient in the augmented regression.

    Computed in projection form: the squared-lag regressor is partialled
    against the lagged level, and the residual variance uses ``1/T`` scaling.
    """
    vals, nuis, w = _prepare(y, rho, modified)
    fit = augmented_fit(vals, w)
    if fit.sigma_xi2 <= 0.0:
        raise DegenerateSeriesError("exact fit leaves no residual variance")
    s11, s12 = fit.gram[0]
    _, s22 = fit.gram[1]
    det = s11 * s22 - s12 * s12
    # x2'M1x2 = det / s11 after partialling the level out of the squared lag.
    value = fit.omega2_hat * math.sqrt(det / s11) / math.sqrt(fit.sigma_xi2)
    kind = StatKind.AUG_T_STAR if modified else StatKind.AUG_T
    return StatValue(kind=kind, value=value, nuisance=nuis, rho_used=float(rho))


def wald_stat(y, rho: float, modified: bool = False) -> StatValue:
    """Wald statistic on both slope coefficients of the augmented regression.

    ``theta_hat' (X~'X~) theta_hat / sigma_xi2`` — always nonnegative.
    """
    vals, nuis, w = _prepare(y, rho, modified)
    fit = augmented_fit(vals, w)
    if fit.sigma_xi2 <= 0.0:
        raise DegenerateSeriesError("exact fit leaves no residual variance")
    theta = np.array([fit.delta_hat, fit.omega2_hat])
    value = float(theta @ fit.gram @ theta) / fit.sigma_xi2
    kind = StatKind.WALD_STAR if modified else StatKind.WALD
    return StatValue(kind=kind, value=value, nuisance=nuis, rho_used=float(rho))


def pivotal_critical_value(kind: StatKind, alpha: float) -> float:
    """Upper-``alpha`` critical value of the pivotal null law.

    Only the modified statistics are pivotal at the hypothesized
    coefficient: standard normal for the t-types (one-sided, upper tail)
    and chi-square(2) for the Wald type.
    """
    if not kind.modified:
        raise ParameterError(
            f"{kind.value} has no pivotal null; simulate its critical value"
        )
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    if kind is StatKind.WALD_STAR:
        return float(spstats.chi2.ppf(1.0 - alpha, df=2))
    return float(spstats.norm.ppf(1.0 - alpha))
