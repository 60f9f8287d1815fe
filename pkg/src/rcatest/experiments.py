"""Monte Carlo experiment drivers: size, power, and asymptotic power.

Every driver returns a :class:`ResultTable` with one row per (design point,
statistic) pair and a metadata dictionary carrying the full configuration,
so a run can be reproduced bit-for-bit from its output files.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import _kernels
from ._rng import PATH_BATCH, batch_sizes, child_rng, ordered_map
from .bonferroni import (
    DEFAULT_ABAR_GRID,
    DEFAULT_ALPHA1_TABLE,
    Alpha1Table,
    GridSpec,
    _batch_bonferroni,
)
from .errors import ParameterError, TableError
from .limitdist import (
    CriticalValueTable,
    PathConfig,
    _sidecar_path,
    asymptotic_power_curve,
    draw_functionals,
)
from .simulate import InnovationSpec, gen_innovations
from .teststats import StatKind, pivotal_critical_value

__all__ = [
    "ExperimentConfig",
    "ResultTable",
    "run_size",
    "run_power",
    "run_asymp_power",
    "RESULT_COLUMNS",
]

RESULT_COLUMNS = (
    "design", "T", "rho", "a", "corr", "omega2", "c2", "kind", "rate", "se",
    "reps",
)

_SIZE_STREAM = 31
_POWER_STREAM = 32
_NULL_STREAM = 33


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared Monte Carlo controls for the experiment drivers."""

    reps: int = 5000
    seed: int = 0
    threads: int = 1
    alpha2: float = 0.05

    def __post_init__(self):
        if self.reps < 1:
            raise ParameterError("reps must be positive")
        if not 0.0 < self.alpha2 < 1.0:
            raise ParameterError("alpha2 must lie in (0, 1)")


@dataclass
class ResultTable:
    """Rejection rates in long format with provenance metadata."""

    rows: list[dict]
    meta: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(RESULT_COLUMNS))

    def to_csv(self, path):
        path = Path(path)
        self.to_frame().to_csv(path, index=False)
        with open(_sidecar_path(path), "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, path) -> "ResultTable":
        path = Path(path)
        frame = pd.read_csv(path)
        if tuple(frame.columns) != RESULT_COLUMNS:
            raise TableError(f"unexpected columns {list(frame.columns)} in {path}")
        sidecar = _sidecar_path(path)
        if sidecar.exists():
            with open(sidecar) as fh:
                meta = json.load(fh)
        else:
            warnings.warn(f"no provenance sidecar found at {sidecar}", RuntimeWarning)
            meta = {}
        rows = frame.astype(object).where(pd.notna(frame), None).to_dict("records")
        return cls(rows=rows, meta=meta)


def _rate_se(rate: float, reps: int) -> float:
    return float(np.sqrt(rate * (1.0 - rate) / reps))


def _spec_label(spec: InnovationSpec) -> str:
    if spec.kind == "chisq":
        return f"chisq{spec.df}"
    if spec.q is not None:
        return f"normal-q{spec.q:g}"
    if spec.corr:
        return f"normal-corr{spec.corr:g}"
    return "normal"


def _simulate_cell(
    spec: InnovationSpec,
    T: int,
    rho: float,
    omega2: float,
    reps: int,
    seed: int,
    stream: int,
    cell: int,
    threads: int = 1,
) -> np.ndarray:
    """All replication paths for one design cell, batched and seeded."""
    omega = float(np.sqrt(omega2))

    def one(bn):
        b, n = bn
        rng = child_rng(seed, stream, cell, b)
        eps, v = _draw_pair(spec, T, n, rng)
        return _kernels.batch_paths(rho, omega, 0.0, eps, v)

    parts = ordered_map(one, list(enumerate(batch_sizes(reps, PATH_BATCH))),
                        threads=threads)
    return np.concatenate(parts, axis=0)


def _draw_pair(spec: InnovationSpec, T: int, n: int, rng) -> tuple:
    """Batch analogue of :func:`rcatest.simulate.gen_innovations`."""
    if spec.kind == "chisq":
        eps = (rng.chisquare(spec.df, (n, T)) - spec.df) / np.sqrt(2.0 * spec.df)
        v = rng.standard_normal((n, T))
        return eps, v
    r = spec.effective_corr(T)
    eps = rng.standard_normal((n, T))
    w = rng.standard_normal((n, T))
    return eps, r * eps + np.sqrt(1.0 - r * r) * w


def run_size(
    cfg: ExperimentConfig,
    cvtab: CriticalValueTable,
    Ts=(200, 500, 1000),
    rhos=(0.7, 0.8, 0.9, 0.95, 0.99, 1.0, 1.01),
    innovations: tuple[InnovationSpec, ...] = (
        InnovationSpec("normal"),
        InnovationSpec("chisq", df=10),
        InnovationSpec("chisq", df=1),
    ),
    alpha1_table: Alpha1Table | None = None,
    grid: GridSpec = DEFAULT_ABAR_GRID,
    kind: StatKind = StatKind.WALD_STAR,
) -> ResultTable:
    """Null rejection rates of the two-step test across designs.

    Every cell simulates ``cfg.reps`` constant-coefficient paths and runs
    the feasible two-step test on each.
    """
    table = DEFAULT_ALPHA1_TABLE if alpha1_table is None else alpha1_table
    label = "BonfWald" if kind is StatKind.WALD_STAR else f"Bonf{kind.value}"
    rows = []
    cell = 0
    for spec in innovations:
        for T in Ts:
            for rho in rhos:
                Y = _simulate_cell(
                    spec, T, rho, 0.0, cfg.reps, cfg.seed, _SIZE_STREAM,
                    cell, cfg.threads,
                )
                reject, _, _ = _batch_bonferroni(
                    Y, cvtab, table, grid, cfg.alpha2, kind
                )
                rate = float(reject.mean())
                rows.append(
                    {
                        "design": f"size-{_spec_label(spec)}",
                        "T": T,
                        "rho": rho,
                        "a": T * (rho - 1.0),
                        "corr": spec.effective_corr(T),
                        "omega2": 0.0,
                        "c2": 0.0,
                        "kind": label,
                        "rate": rate,
                        "se": _rate_se(rate, cfg.reps),
                        "reps": cfg.reps,
                    }
                )
                cell += 1
    meta = {
        "experiment": "size",
        "reps": cfg.reps,
        "seed": cfg.seed,
        "alpha2": cfg.alpha2,
        "kind": kind.value,
        "Ts": list(Ts),
        "rhos": list(rhos),
        "innovations": [_spec_label(s) for s in innovations],
        "grid": {"lo": grid.lo, "hi": grid.hi, "step": grid.step},
        "cv_table_meta": cvtab.meta,
    }
    return ResultTable(rows=rows, meta=meta)


def _power_statistic_draws(
    which: str,
    Y: np.ndarray,
    rho: float,
    cvtab: CriticalValueTable,
    table: Alpha1Table,
    grid: GridSpec,
    alpha2: float,
) -> tuple[np.ndarray, float]:
    """Per-path statistic draws and the nominal critical value for one kind."""
    if which == "BonfWald":
        reject, smin, _ = _batch_bonferroni(
            Y, cvtab, table, grid, alpha2, StatKind.WALD_STAR
        )
        cv = pivotal_critical_value(StatKind.WALD_STAR, alpha2)
        # Empty retained sets leave NaN; they never reject at any cv.
        return np.where(np.isnan(smin), -np.inf, smin), cv
    if which == "InfeasibleWaldStar":
        stats = _kernels.stats_at_rho(Y, rho, [StatKind.WALD_STAR])
        return stats[StatKind.WALD_STAR], pivotal_critical_value(
            StatKind.WALD_STAR, alpha2
        )
    if which == "LNstarKnownRho":
        stats = _kernels.stats_at_rho(Y, rho, [StatKind.LN_STAR])
        return stats[StatKind.LN_STAR], pivotal_critical_value(
            StatKind.LN_STAR, alpha2
        )
    raise ParameterError(f"unknown power statistic {which!r}")


def run_power(
    cfg: ExperimentConfig,
    cvtab: CriticalValueTable,
    T: int = 200,
    rhos=(1.01, 1.0, 0.98, 0.95),
    corrs=(0.0, 0.25, 0.5, 0.75),
    omega2s=(0.0025, 0.005, 0.0075, 0.01),
    kinds=("BonfWald", "InfeasibleWaldStar", "LNstarKnownRho"),
    alpha1_table: Alpha1Table | None = None,
    grid: GridSpec = DEFAULT_ABAR_GRID,
    size_adjust: bool = False,
    innovation_kind: str = "normal",
) -> ResultTable:
    """Finite-sample power of the feasible test against two references.

    ``BonfWald`` is the feasible two-step test.  ``InfeasibleWaldStar`` and
    ``LNstarKnownRho`` evaluate the modified Wald / score statistics at the
    true coefficient (an infeasible benchmark).  With ``size_adjust`` the
    critical value of each statistic is its simulated finite-sample null
    quantile at the same design point instead of the pivotal one.
    """
    if innovation_kind != "normal":
        raise ParameterError("power designs use jointly normal innovations")
    table = DEFAULT_ALPHA1_TABLE if alpha1_table is None else alpha1_table
    rows = []
    cell = 0
    for corr in corrs:
        spec = InnovationSpec("normal", corr=corr)
        for rho in rhos:
            for omega2 in omega2s:
                Y = _simulate_cell(
                    spec, T, rho, omega2, cfg.reps, cfg.seed, _POWER_STREAM,
                    cell, cfg.threads,
                )
                null_Y = None
                if size_adjust:
                    null_Y = _simulate_cell(
                        spec, T, rho, 0.0, cfg.reps, cfg.seed, _NULL_STREAM,
                        cell, cfg.threads,
                    )
                for which in kinds:
                    draws, cv = _power_statistic_draws(
                        which, Y, rho, cvtab, table, grid, cfg.alpha2
                    )
                    if size_adjust:
                        null_draws, _ = _power_statistic_draws(
                            which, null_Y, rho, cvtab, table, grid, cfg.alpha2
                        )
                        cv = float(np.quantile(null_draws, 1.0 - cfg.alpha2))
                    rate = float(np.mean(draws > cv))
                    rows.append(
                        {
                            "design": "power" + ("-adj" if size_adjust else ""),
                            "T": T,
                            "rho": rho,
                            "a": T * (rho - 1.0),
                            "corr": corr,
                            "omega2": omega2,
                            "c2": omega2 * T**1.5,
                            "kind": which,
                            "rate": rate,
                            "se": _rate_se(rate, cfg.reps),
                            "reps": cfg.reps,
                        }
                    )
                cell += 1
    meta = {
        "experiment": "power",
        "reps": cfg.reps,
        "seed": cfg.seed,
        "alpha2": cfg.alpha2,
        "T": T,
        "rhos": list(rhos),
        "corrs": list(corrs),
        "omega2s": list(omega2s),
        "kinds": list(kinds),
        "size_adjust": size_adjust,
        "grid": {"lo": grid.lo, "hi": grid.hi, "step": grid.step},
        "cv_table_meta": cvtab.meta,
    }
    return ResultTable(rows=rows, meta=meta)


def run_asymp_power(
    kinds=(StatKind.LN, StatKind.AUG_T, StatKind.WALD),
    c2_grid=None,
    a: float = 0.0,
    psi: float = 0.0,
    q_values=(0.0,),
    ratio: float = 2**-0.5,
    level: float = 0.05,
    steps: int = 2000,
    reps: int = 100_000,
    seed: int = 0,
    threads: int = 1,
) -> ResultTable:
    """Limit-law rejection rates along a grid of local alternatives.

    One set of functional draws (fixed ``a`` and ``psi``) serves every kind
    and every localized-correlation value, since those only enter the limit
    statistics algebraically.
    """
    if c2_grid is None:
        c2_grid = np.linspace(0.0, 30.0, 13)
    cfg = PathConfig(steps=steps, reps=reps, seed=seed, a=a, psi=psi)
    draws = draw_functionals(cfg, threads=threads)
    rows = []
    for q in q_values:
        for kind in kinds:
            curve = asymptotic_power_curve(
                kind, c2_grid, cfg, q=q, ratio=ratio, level=level, draws=draws
            )
            for c2, power in zip(curve.c2, curve.power):
                rows.append(
                    {
                        "design": "asymp-power",
                        "T": None,
                        "rho": None,
                        "a": a,
                        "corr": q,
                        "omega2": None,
                        "c2": float(c2),
                        "kind": kind.value,
                        "rate": float(power),
                        "se": _rate_se(float(power), reps),
                        "reps": reps,
                    }
                )
    meta = {
        "experiment": "asymp-power",
        "steps": steps,
        "reps": reps,
        "seed": seed,
        "a": a,
        "psi": psi,
        "q_values": list(q_values),
        "ratio": ratio,
        "level": level,
        "kinds": [k.value for k in kinds],
    }
    return ResultTable(rows=rows, meta=meta)
