"""Data generation for near-unit-root autoregressions with a random coefficient.

The observation equation is

    y[t] = (rho + omega * v[t]) * y[t-1] + eps[t],    t = 1, ..., T,

where ``rho`` may be parameterized through a local drift ``a`` as
``rho = 1 + a/T`` and the coefficient-noise scale through a local value
``c2`` as ``omega^2 = c2 / T**1.5``.  The innovation pair ``(eps, v)`` is
iid with unit-variance components and a (possibly sample-size-localized)
correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "InnovationSpec",
    "RcaParams",
    "Series",
    "gen_innovations",
    "simulate_rca",
    "eta_replacement",
    "replaced_z2",
]

_REL_TOL = 1e-12


@dataclass(frozen=True)
class InnovationSpec:
    """Joint law of the level innovation ``eps`` and coefficient shock ``v``.

    Parameters
    ----------
    kind : {"normal", "chisq"}
        ``"normal"``: bivariate Gaussian pair.  ``"chisq"``: ``eps`` is a
        standardized chi-square variate (mean 0, variance 1) and ``v`` an
        independent standard normal.
    df : int, optional
        Degrees of freedom, required iff ``kind == "chisq"``.
    corr : float
        Fixed correlation between ``eps`` and ``v``.  Only the normal kind
        supports a nonzero value.
    q : float, optional
        Localized-correlation parameter.  When set, the correlation used at
        sample size ``T`` is ``q / T**0.25`` and ``corr`` must be 0.
    """

    kind: str = "normal"
    df: int | None = None
    corr: float = 0.0
    q: float | None = None

    def __post_init__(self):
        if self.kind not in ("normal", "chisq"):
            raise ParameterError(f"unknown innovation kind {self.kind!r}")
        if self.kind == "chisq":
            if self.df is None or self.df < 1 or int(self.df) != self.df:
                raise ParameterError("chisq innovations need integer df >= 1")
            if self.corr != 0.0 or self.q is not None:
                raise ParameterError(
                    "chisq innovations only support an independent coefficient "
                    "shock (corr must be 0 and q unset)"
                )
        else:
            if self.df is not None:
                raise ParameterError("df is only meaningful for chisq innovations")
            if self.q is not None and self.corr != 0.0:
                raise ParameterError("give either corr or q, not both")
            if abs(self.corr) > 1.0:
                raise ParameterError("corr must lie in [-1, 1]")

    def effective_corr(self, T: int) -> float:
        """Correlation actually used at sample size ``T``."""
        if self.q is None:
            return self.corr
        r = self.q / T**0.25
        if abs(r) > 1.0:
            raise ParameterError(
                f"localized correlation q/T**0.25 = {r:.4f} falls outside [-1, 1]"
            )
        return r

    # Population moments of eps implied by the innovation kind (eps is
    # always scaled to unit variance).
    @property
    def sigma_eps2(self) -> float:
        return 1.0

    @property
    def sigma_eta2(self) -> float:
        """Variance of ``eps**2 - 1``."""
        if self.kind == "chisq":
            return 2.0 + 12.0 / self.df
        return 2.0

    @property
    def psi(self) -> float:
        """Correlation between ``eps`` and ``eps**2 - 1``."""
        if self.kind == "chisq":
            return math.sqrt(8.0 / self.df) / math.sqrt(12.0 / self.df + 2.0)
        return 0.0

    @property
    def eps_eta_ratio(self) -> float:
        """``sigma_eps**2 / sigma_eta``, the drift scale in limit laws."""
        return self.sigma_eps2 / math.sqrt(self.sigma_eta2)


def gen_innovations(
    spec: InnovationSpec, T: int, seed
) -> tuple[np.ndarray, np.ndarray]:
    """Draw the innovation pair ``(eps, v)``, each of length ``T``.

    Deterministic given ``(spec, T, seed)``; ``seed`` may be anything
    ``numpy.random.default_rng`` accepts.
    """
    if T < 1:
        raise ParameterError("T must be at least 1")
    rng = np.random.default_rng(seed)
    if spec.kind == "chisq":
        eps = (rng.chisquare(spec.df, T) - spec.df) / math.sqrt(2.0 * spec.df)
        v = rng.standard_normal(T)
        return eps, v
    r = spec.effective_corr(T)
    eps = rng.standard_normal(T)
    w = rng.standard_normal(T)
    v = r * eps + math.sqrt(1.0 - r * r) * w
    return eps, v


@dataclass(frozen=True)
class RcaParams:
    """Resolved parameters of the generating mechanism.

    Give ``rho`` or ``a`` (both, if consistent with ``rho = 1 + a/T``), and
    ``omega2`` or ``c2`` (both, if consistent with ``omega2 = c2/T**1.5``).
    Omitting both members of a pair selects the null defaults ``rho = 1``
    and ``omega2 = 0``.
    """

    T: int
    rho: float | None = None
    a: float | None = None
    omega2: float | None = None
    c2: float | None = None
    y0: float = 0.0

    def __post_init__(self):
        if self.T < 1:
            raise ParameterError("T must be at least 1")
        if self.rho is not None and self.a is not None:
            implied = 1.0 + self.a / self.T
            if abs(self.rho - implied) > _REL_TOL * max(1.0, abs(self.rho)):
                raise ParameterError(
                    f"rho={self.rho} conflicts with a={self.a} (implies {implied})"
                )
        if self.omega2 is not None and self.omega2 < 0:
            raise ParameterError("omega2 must be nonnegative")
        if self.c2 is not None and self.c2 < 0:
            raise ParameterError("c2 must be nonnegative")
        if self.omega2 is not None and self.c2 is not None:
            implied = self.c2 / self.T**1.5
            if abs(self.omega2 - implied) > _REL_TOL * max(1.0, self.omega2):
                raise ParameterError(
                    f"omega2={self.omega2} conflicts with c2={self.c2} "
                    f"(implies {implied})"
                )

    @property
    def rho_T(self) -> float:
        if self.rho is not None:
            return self.rho
        if self.a is not None:
            return 1.0 + self.a / self.T
        return 1.0

    @property
    def a_T(self) -> float:
        return self.T * (self.rho_T - 1.0)

    @property
    def omega2_T(self) -> float:
        if self.omega2 is not None:
            return self.omega2
        if self.c2 is not None:
            return self.c2 / self.T**1.5
        return 0.0

    @property
    def omega_T(self) -> float:
        return math.sqrt(self.omega2_T)

    @property
    def c2_T(self) -> float:
        return self.omega2_T * self.T**1.5


@dataclass(frozen=True)
class Series:
    """A univariate series ``y[0..T]`` (initial value included)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ParameterError("a series needs a 1-D array of length >= 2")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("series values must be finite")
        object.__setattr__(self, "values", arr)

    @property
    def T(self) -> int:
        """Number of transitions (length minus one)."""
        return self.values.size - 1

    def __len__(self) -> int:
        return self.values.size


def simulate_rca(params: RcaParams, eps: np.ndarray, v: np.ndarray) -> Series:
    """Run the recursion for one path given pre-drawn innovations.

    ``eps`` and ``v`` must each have length ``params.T``; ``v`` is ignored
    in effect when the coefficient-noise scale is zero but must still be
    supplied so call sites keep a uniform shape.
    """
    eps = np.asarray(eps, dtype=float)
    v = np.asarray(v, dtype=float)
    if eps.shape != (params.T,) or v.shape != (params.T,):
        raise ParameterError("eps and v must both have shape (T,)")
    rho = params.rho_T
    om = params.omega_T
    y = np.empty(params.T + 1)
    y[0] = params.y0
    prev = params.y0
    if om == 0.0:
        for t in range(params.T):
            prev = rho * prev + eps[t]
            y[t + 1] = prev
    else:
        for t in range(params.T):
            prev = (rho + om * v[t]) * prev + eps[t]
            y[t + 1] = prev
    return Series(y)


def eta_replacement(eps: np.ndarray, psi: float) -> np.ndarray:
    """Synthetic centered squared-innovation sequence with target skew-link.

    Maps unit-variance ``eps`` to ``sqrt(1-psi**2)*(eps**2 - 1)
    + psi*sqrt(2)*eps``, which has mean 0, variance 2 and correlation
    ``psi`` with ``eps`` when ``eps`` is standard normal.
    """
    if not -1.0 < psi < 1.0:
        raise ParameterError("psi must lie strictly inside (-1, 1)")
    eps = np.asarray(eps, dtype=float)
    return math.sqrt(1.0 - psi * psi) * (eps * eps - 1.0) + psi * math.sqrt(2.0) * eps


def replaced_z2(
    y: Series | np.ndarray,
    eps: np.ndarray,
    a: float,
    abar: float,
    psi: float,
) -> np.ndarray:
    """Squared residuals at drift ``abar`` with the synthetic squared noise.

    For a path generated with true drift ``a`` and unit innovation variance,
    the residual at ``rho_bar = 1 + abar/T`` satisfies
    ``z[t] = eps[t] - d*y[t-1]`` with ``d = (abar - a)/T``, so its square is
    ``eps**2 - 2*d*y[t-1]*eps[t] + d**2*y[t-1]**2``.  This helper swaps
    ``eps**2`` for ``1 + eta_replacement(eps, psi)``, giving a squared-residual
    sequence whose skew-link with ``eps`` is exactly ``psi``.
    """
    vals = y.values if isinstance(y, Series) else np.asarray(y, dtype=float)
    eps = np.asarray(eps, dtype=float)
    T = eps.size
    if vals.size != T + 1:
        raise ParameterError("y must have length len(eps) + 1")
    d = (abar - a) / T
    lag = vals[:-1]
    return 1.0 + eta_replacement(eps, psi) + d * d * lag * lag - 2.0 * d * lag * eps
