"""Simulation of the limiting laws of the statistics.

The building block is a linear-drift diffusion ``J`` driven by a Wiener
process ``W_e`` (``dJ = a*J dr + dW_e``, ``J(0) = 0``), discretized by an
Euler scheme on ``steps`` intervals.  Every functional below is a left-point
Riemann or Ito sum on that grid.

For a path with demeaned levels ``Jt1 = J - int(J)`` and demeaned squares
``Jt2 = J**2 - int(J**2)``, a draw records

* ``S11 = int(Jt1**2)``, ``S12 = int(Jt1*Jt2)``, ``S22 = int(Jt2**2)``,
* stochastic integrals of ``Jt1``, ``Jt2`` and the partialled combination
  ``Q = Jt2 - (S12/S11)*Jt1`` against two drivers: a second Wiener process
  correlated with ``W_e`` at level ``psi`` (used by the plain statistics)
  and its independent component (used by the modified statistics),
* ``int(J dW_e)`` and ``int(J**2)`` for the autoregression t-ratio law.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ._rng import LIMIT_BATCH, batch_sizes, child_rng, ordered_map
from .errors import ParameterError, TableError
from .teststats import StatKind, pivotal_critical_value

__all__ = [
    "PathConfig",
    "FunctionalDraws",
    "CriticalValueTable",
    "PowerCurve",
    "draw_functionals",
    "limit_stat",
    "build_cv_table",
    "asymptotic_power_curve",
    "DEFAULT_STEPS",
    "DEFAULT_POWER_REPS",
    "DEFAULT_CV_REPS",
    "DEFAULT_CV_A_GRID",
    "DEFAULT_CV_LEVELS",
]

DEFAULT_STEPS = 2000
DEFAULT_POWER_REPS = 100_000
DEFAULT_CV_REPS = 200_000

# Non-uniform drift grid for critical-value tables: dense where the
# quantile curves bend (near zero), sparse in the far stationary tail.
# Queries between grid points interpolate linearly in the drift.
DEFAULT_CV_A_GRID = np.array(
    [-300.0, -250.0, -200.0, -160.0, -130.0, -100.0, -80.0, -60.0, -50.0,
     -40.0, -30.0, -25.0, -20.0, -16.0, -12.0, -10.0, -8.0, -6.0, -5.0,
     -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0,
     10.0, 12.0, 15.0, 20.0]
)

# Both tails at every half-level k/200, k = 1..60: covers alpha1 candidates
# 0.01..0.60 and every shipped alpha1 schedule entry.
DEFAULT_CV_LEVELS = np.unique(
    np.round(
        np.concatenate(
            [np.arange(1, 61) / 200.0, 1.0 - np.arange(1, 61) / 200.0]
        ),
        10,
    )
)

_FUNC_STREAM = 11
_CV_STREAM = 12


@dataclass(frozen=True)
class PathConfig:
    """Discretization and sampling plan for limit-law draws."""

    steps: int = DEFAULT_STEPS
    reps: int = DEFAULT_POWER_REPS
    seed: int = 0
    a: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        if self.steps < 2:
            raise ParameterError("steps must be at least 2")
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if not -1.0 < self.psi < 1.0:
            raise ParameterError("psi must lie strictly inside (-1, 1)")


@dataclass(frozen=True)
class FunctionalDraws:
    """Per-replication functionals of the limit diffusion (see module doc).

    ``*_dweta`` integrals are driven by the ``psi``-correlated process, used
    by the plain statistics; ``*_dw1`` integrals by its independent
    component, used by the modified statistics.  When ``psi == 0`` the two
    coincide bitwise.
    """

    config: PathConfig
    s11: np.ndarray
    s12: np.ndarray
    s22: np.ndarray
    sqq: np.ndarray
    i_j1_dweta: np.ndarray
    i_j2_dweta: np.ndarray
    i_q_dweta: np.ndarray
    i_j1_dw1: np.ndarray
    i_j2_dw1: np.ndarray
    i_q_dw1: np.ndarray
    i_j_dweps: np.ndarray
    sjj: np.ndarray

    def i_j1_dw(self, modified: bool) -> np.ndarray:
        return self.i_j1_dw1 if modified else self.i_j1_dweta

    def i_j2_dw(self, modified: bool) -> np.ndarray:
        return self.i_j2_dw1 if modified else self.i_j2_dweta

    def i_q_dw(self, modified: bool) -> np.ndarray:
        return self.i_q_dw1 if modified else self.i_q_dweta


def _draw_batch(cfg: PathConfig, batch: int, n: int) -> dict[str, np.ndarray]:
    rng = child_rng(cfg.seed, _FUNC_STREAM, batch)
    steps = cfg.steps
    dt = 1.0 / steps
    sdt = math.sqrt(dt)
    psi = cfg.psi
    comp = math.sqrt(1.0 - psi * psi)
    a_dt = cfg.a * dt

    J = np.zeros(n)
    m1 = np.zeros(n)
    m2 = np.zeros(n)
    m3 = np.zeros(n)
    m4 = np.zeros(n)
    i_j_e = np.zeros(n)
    i_j_eta = np.zeros(n)
    i_j2_eta = np.zeros(n)
    i_j_1 = np.zeros(n)
    i_j2_1 = np.zeros(n)
    w_eta = np.zeros(n)
    w_1 = np.zeros(n)

    for _ in range(steps):
        dwe = rng.standard_normal(n) * sdt
        dw1 = rng.standard_normal(n) * sdt
        dweta = psi * dwe + comp * dw1
        J2 = J * J
        m1 += J
        m2 += J2
        m3 += J2 * J
        m4 += J2 * J2
        i_j_e += J * dwe
        i_j_eta += J * dweta
        i_j2_eta += J2 * dweta
        i_j_1 += J * dw1
        i_j2_1 += J2 * dw1
        w_eta += dweta
        w_1 += dw1
        J = J + a_dt * J + dwe

    m1 *= dt
    m2 *= dt
    m3 *= dt
    m4 *= dt
    s11 = m2 - m1 * m1
    s22 = m4 - m2 * m2
    s12 = m3 - m1 * m2
    ratio = s12 / s11
    i_j1_eta = i_j_eta - m1 * w_eta
    i_j2_eta = i_j2_eta - m2 * w_eta
    i_j1_one = i_j_1 - m1 * w_1
    i_j2_one = i_j2_1 - m2 * w_1
    return {
        "s11": s11,
        "s12": s12,
        "s22": s22,
        "sqq": s22 - s12 * ratio,
        "i_j1_dweta": i_j1_eta,
        "i_j2_dweta": i_j2_eta,
        "i_q_dweta": i_j2_eta - ratio * i_j1_eta,
        "i_j1_dw1": i_j1_one,
        "i_j2_dw1": i_j2_one,
        "i_q_dw1": i_j2_one - ratio * i_j1_one,
        "i_j_dweps": i_j_e,
        "sjj": m2,
    }


def draw_functionals(cfg: PathConfig, threads: int = 1) -> FunctionalDraws:
    """Simulate ``cfg.reps`` independent draws of the limit functionals.

    Replications are split into fixed-size batches, each with its own child
    seed; output is bit-identical for any ``threads``.
    """
    sizes = batch_sizes(cfg.reps, LIMIT_BATCH)
    parts = ordered_map(
        lambda bn: _draw_batch(cfg, bn[0], bn[1]),
        list(enumerate(sizes)),
        threads=threads,
    )
    merged = {
        key: np.concatenate([p[key] for p in parts]) for key in parts[0]
    }
    return FunctionalDraws(config=cfg, **merged)


def limit_stat(
    draws: FunctionalDraws,
    kind: StatKind,
    c2: float,
    q: float = 0.0,
    ratio: float = 2**-0.5,
) -> np.ndarray:
    """Per-draw values of a statistic's limit law at local alternative ``c2``.

    Parameters
    ----------
    draws : FunctionalDraws
    kind : StatKind
    c2 : float
        Squared local coefficient-noise scale (0 gives the null law).
    q : float
        Localized innovation correlation.
    ratio : float
        ``sigma_eps**2 / sigma_eta`` of the innovation law (``1/sqrt(2)``
        for Gaussian innovations).  For modified kinds the effective drift
        scale becomes ``ratio / sqrt(1 - psi**2)``.
    """
    if c2 < 0:
        raise ParameterError("c2 must be nonnegative")
    c = math.sqrt(c2)
    psi = draws.config.psi
    ds = ratio / math.sqrt(1.0 - psi * psi) if kind.modified else ratio
    if kind in (StatKind.LN, StatKind.LN_STAR):
        drift = ds * (c2 * draws.s22 + 2.0 * c * q * draws.s12)
        return (draws.i_j2_dw(kind.modified) + drift) / np.sqrt(draws.s22)
    if kind in (StatKind.AUG_T, StatKind.AUG_T_STAR):
        sq = np.sqrt(draws.sqq)
        return draws.i_q_dw(kind.modified) / sq + ds * c2 * sq
    b1 = draws.i_j1_dw(kind.modified) + ds * (
        c2 * draws.s12 + 2.0 * c * q * draws.s11
    )
    b2 = draws.i_j2_dw(kind.modified) + ds * (
        c2 * draws.s22 + 2.0 * c * q * draws.s12
    )
    det = draws.s11 * draws.s22 - draws.s12 * draws.s12
    return (
        draws.s22 * b1 * b1 - 2.0 * draws.s12 * b1 * b2 + draws.s11 * b2 * b2
    ) / det


# ---------------------------------------------------------------------------
# Critical-value tables for the autoregression t-ratio
# ---------------------------------------------------------------------------


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json") if path.suffix == ".csv" else Path(
        str(path) + ".json"
    )


@dataclass
class CriticalValueTable:
    """Quantiles of the t-ratio limit law on a drift grid.

    ``quantiles[i, j]`` is the ``levels[j]`` quantile at drift
    ``a_values[i]``.  Queries interpolate linearly between drift grid
    points; the level must match a stored level exactly.
    """

    a_values: np.ndarray
    levels: np.ndarray
    quantiles: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.a_values = np.asarray(self.a_values, dtype=float)
        self.levels = np.asarray(self.levels, dtype=float)
        self.quantiles = np.asarray(self.quantiles, dtype=float)
        self.validate()

    def validate(self):
        if self.a_values.ndim != 1 or np.any(np.diff(self.a_values) <= 0):
            raise TableError("drift grid must be strictly increasing")
        if (
            self.levels.ndim != 1
            or np.any(np.diff(self.levels) <= 0)
            or self.levels[0] <= 0.0
            or self.levels[-1] >= 1.0
        ):
            raise TableError("levels must be strictly increasing inside (0, 1)")
        if self.quantiles.shape != (self.a_values.size, self.levels.size):
            raise TableError("quantile grid shape mismatch")
        if not np.all(np.isfinite(self.quantiles)):
            raise TableError("quantiles must be finite")
        if np.any(np.diff(self.quantiles, axis=1) < -1e-12):
            raise TableError("quantiles must be nondecreasing in the level")

    def _level_index(self, level: float) -> int:
        idx = np.nonzero(np.isclose(self.levels, level, rtol=0.0, atol=1e-9))[0]
        if idx.size != 1:
            raise TableError(
                f"level {level} not stored; available levels span "
                f"[{self.levels[0]}, {self.levels[-1]}] in {self.levels.size} points"
            )
        return int(idx[0])

    def quantile(self, a, level: float, clamp: bool = False):
        """Critical value at drift ``a`` (scalar or array) and one level."""
        j = self._level_index(level)
        a_arr = np.asarray(a, dtype=float)
        lo, hi = self.a_values[0], self.a_values[-1]
        if not clamp and (np.any(a_arr < lo) or np.any(a_arr > hi)):
            raise TableError(
                f"drift query outside table range [{lo}, {hi}]; "
                "pass clamp=True to pin to the endpoints"
            )
        out = np.interp(np.clip(a_arr, lo, hi), self.a_values, self.quantiles[:, j])
        return float(out) if out.ndim == 0 else out

    def to_csv(self, path):
        """Write the long-format CSV plus its JSON provenance sidecar."""
        path = Path(path)
        n_a, n_l = self.quantiles.shape
        frame = pd.DataFrame(
            {
                "a": np.repeat(self.a_values, n_l),
                "level": np.tile(self.levels, n_a),
                "quantile": self.quantiles.ravel(),
            }
        )
        frame.to_csv(path, index=False)
        with open(_sidecar_path(path), "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, path) -> "CriticalValueTable":
        path = Path(path)
        frame = pd.read_csv(path)
        if list(frame.columns) != ["a", "level", "quantile"]:
            raise TableError(f"unexpected columns {list(frame.columns)} in {path}")
        a_values = np.unique(frame["a"].to_numpy())
        levels = np.unique(frame["level"].to_numpy())
        pivot = frame.pivot(index="a", columns="level", values="quantile")
        if pivot.isna().any().any():
            raise TableError("table is missing (a, level) combinations")
        sidecar = _sidecar_path(path)
        if sidecar.exists():
            with open(sidecar) as fh:
                meta = json.load(fh)
        else:
            warnings.warn(f"no provenance sidecar found at {sidecar}", RuntimeWarning)
            meta = {}
        return cls(
            a_values=a_values,
            levels=levels,
            quantiles=pivot.to_numpy(),
            meta=meta,
        )


def _t_null_batch(
    a_vec: np.ndarray, steps: int, seed: int, batch: int, n: int
) -> np.ndarray:
    """t-ratio limit draws for every drift in ``a_vec`` from shared noise.

    Sharing the Wiener increments across drifts (common random numbers)
    makes the quantile curves smooth in ``a``; each row is still an exact
    sample from the law at its own drift.
    """
    rng = child_rng(seed, _CV_STREAM, batch)
    dt = 1.0 / steps
    sdt = math.sqrt(dt)
    k = a_vec.size
    growth = (1.0 + a_vec * dt)[:, None]
    J = np.zeros((k, n))
    num = np.zeros((k, n))
    den = np.zeros((k, n))
    for _ in range(steps):
        dw = rng.standard_normal(n) * sdt
        num += J * dw
        den += J * J
        J = growth * J + dw
    return num / np.sqrt(den * dt)


def build_cv_table(
    a_grid=None,
    levels=None,
    cfg: PathConfig | None = None,
    threads: int = 1,
) -> CriticalValueTable:
    """Simulate the t-ratio critical-value table.

    ``cfg.a`` and ``cfg.psi`` are ignored — the table spans ``a_grid`` and
    the t-ratio law does not involve the skew-link.
    """
    if cfg is None:
        cfg = PathConfig(reps=DEFAULT_CV_REPS)
    a_vec = np.unique(np.asarray(
        DEFAULT_CV_A_GRID if a_grid is None else a_grid, dtype=float
    ))
    lvl = np.unique(np.asarray(
        DEFAULT_CV_LEVELS if levels is None else levels, dtype=float
    ))
    if np.any(lvl <= 0.0) or np.any(lvl >= 1.0):
        raise ParameterError("levels must lie strictly inside (0, 1)")
    sizes = batch_sizes(cfg.reps, LIMIT_BATCH // 8)
    parts = ordered_map(
        lambda bn: _t_null_batch(a_vec, cfg.steps, cfg.seed, bn[0], bn[1]),
        list(enumerate(sizes)),
        threads=threads,
    )
    draws = np.concatenate(parts, axis=1)
    quantiles = np.quantile(draws, lvl, axis=1).T
    from . import __version__

    return CriticalValueTable(
        a_values=a_vec,
        levels=lvl,
        quantiles=quantiles,
        meta={
            "steps": cfg.steps,
            "reps": cfg.reps,
            "seed": cfg.seed,
            "version": __version__,
        },
    )


# ---------------------------------------------------------------------------
# Asymptotic power
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerCurve:
    """Rejection frequency of a statistic's limit law along a ``c2`` grid."""

    kind: StatKind
    c2: np.ndarray
    power: np.ndarray
    critical_value: float
    level: float
    q: float
    ratio: float
    config: PathConfig


def asymptotic_power_curve(
    kind: StatKind,
    c2_grid,
    cfg: PathConfig,
    q: float = 0.0,
    ratio: float = 2**-0.5,
    level: float = 0.05,
    draws: FunctionalDraws | None = None,
    threads: int = 1,
) -> PowerCurve:
    """Power of the upper-tail test of size ``level`` along ``c2_grid``.

    Modified statistics are compared against their pivotal critical values;
    so are the plain ones when ``cfg.psi == 0`` (the laws then coincide).
    A plain statistic with ``cfg.psi != 0`` has a nonstandard null, so its
    critical value is the simulated null quantile from the same draws.
    """
    c2_grid = np.asarray(c2_grid, dtype=float)
    if np.any(c2_grid < 0):
        raise ParameterError("c2 values must be nonnegative")
    if draws is None:
        draws = draw_functionals(cfg, threads=threads)
    if kind.modified or cfg.psi == 0.0:
        pivotal_kind = kind if kind.modified else {
            StatKind.LN: StatKind.LN_STAR,
            StatKind.AUG_T: StatKind.AUG_T_STAR,
            StatKind.WALD: StatKind.WALD_STAR,
        }[kind]
        cv = pivotal_critical_value(pivotal_kind, level)
    else:
        cv = float(np.quantile(limit_stat(draws, kind, 0.0, q, ratio), 1.0 - level))
    power = np.array(
        [float(np.mean(limit_stat(draws, kind, c2, q, ratio) > cv)) for c2 in c2_grid]
    )
    return PowerCurve(
        kind=kind,
        c2=c2_grid,
        power=power,
        critical_value=cv,
        level=level,
        q=q,
        ratio=ratio,
        config=cfg,
    )
