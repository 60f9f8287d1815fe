"""Command-line interface.

Subcommands: ``simulate``, ``test``, ``size``, ``power``, ``asymp-power``,
``cvtable``, ``calibrate``, ``alpha1``.  The flags ``--seed``, ``--threads``
and ``--out`` are accepted by every subcommand.  Exit status is 0 on
success and 1 on any handled error.

Heavy lookup tables are cached under ``$RCATEST_TABLE_DIR`` (default
``~/.cache/rcatest``) when a command needs one and no explicit table file
is given.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bonferroni import (
    DEFAULT_ALPHA1_TABLE,
    Alpha1Table,
    GridSpec,
    bonferroni_test,
    calibrate_alpha1,
)
from .dataio import EmpiricalConfig, ingest, write_series_csv
from .errors import RcaTestError
from .experiments import ExperimentConfig, run_asymp_power, run_power, run_size
from .limitdist import (
    CriticalValueTable,
    PathConfig,
    build_cv_table,
)
from .simulate import InnovationSpec, RcaParams, gen_innovations, simulate_rca
from .teststats import StatKind, ln_stat

_AUTO_CV_SEED = 9
_AUTO_CV_REPS = 20_000

_KIND_BY_NAME = {k.value: k for k in StatKind}
_INNOVATIONS = {
    "normal": InnovationSpec("normal"),
    "chisq10": InnovationSpec("chisq", df=10),
    "chisq1": InnovationSpec("chisq", df=1),
}


def _floats(text: str) -> list[float]:
    return [float(piece) for piece in text.split(",") if piece.strip()]


def _ints(text: str) -> list[int]:
    return [int(piece) for piece in text.split(",") if piece.strip()]


def _table_dir() -> Path:
    env = os.environ.get("RCATEST_TABLE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "rcatest"


def _load_cv_table(path: str | None, threads: int) -> CriticalValueTable:
    if path is not None:
        return CriticalValueTable.from_csv(path)
    cache = _table_dir() / "cvtable-default.csv"
    if cache.exists():
        print(f"using cached critical-value table {cache}", file=sys.stderr)
        return CriticalValueTable.from_csv(cache)
    print(
        "no critical-value table given; building one "
        f"(steps=2000, reps={_AUTO_CV_REPS}, seed={_AUTO_CV_SEED}) "
        f"and caching it at {cache}",
        file=sys.stderr,
    )
    tab = build_cv_table(
        cfg=PathConfig(steps=2000, reps=_AUTO_CV_REPS, seed=_AUTO_CV_SEED),
        threads=threads,
    )
    cache.parent.mkdir(parents=True, exist_ok=True)
    tab.to_csv(cache)
    return tab


def _load_alpha1_table(path: str | None) -> Alpha1Table:
    return DEFAULT_ALPHA1_TABLE if path is None else Alpha1Table.from_csv(path)


def _grid_from(args) -> GridSpec:
    lo, hi, step = args.grid
    return GridSpec(lo=lo, hi=hi, step=step)


def _emit_frame(table, out) -> None:
    if out is None:
        print(table.to_frame().to_csv(index=False), end="")
    else:
        table.to_csv(out)
        print(f"wrote {out}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    spec_kwargs = {}
    if args.kind == "chisq":
        spec_kwargs = {"df": args.df or 1}
        spec = InnovationSpec("chisq", **spec_kwargs)
    elif args.q is not None:
        spec = InnovationSpec("normal", q=args.q)
    else:
        spec = InnovationSpec("normal", corr=args.corr)
    params = RcaParams(
        T=args.length, rho=args.rho, a=args.a, omega2=args.omega2,
        c2=args.c2, y0=args.y0,
    )
    eps, v = gen_innovations(spec, params.T, args.seed)
    series = simulate_rca(params, eps, v)
    if args.out is None:
        print("y")
        for value in series.values:
            print(repr(float(value)))
    else:
        write_series_csv(series, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_test(args) -> int:
    column = args.column_index if args.column_index is not None else args.column
    series, meta = ingest(
        EmpiricalConfig(
            path=args.input, column=column, take_log=args.log,
            detrend=args.detrend,
        )
    )
    kind = _KIND_BY_NAME[args.kind]
    cvtab = _load_cv_table(args.cv_table, args.threads)
    a1tab = _load_alpha1_table(args.alpha1_table)
    report = bonferroni_test(
        series,
        cvtab,
        alpha1_table=a1tab,
        grid=_grid_from(args),
        alpha2=args.alpha2,
        kind=kind,
        include_per_point=args.per_point,
    )
    print(
        f"series: {meta['path']} [{meta['column']}]  n={meta['n']}  "
        f"log={meta['take_log']}  detrend={meta['detrend']}"
    )
    print(
        f"T={report.T}  rho_hat={report.rho_hat:.6f}  "
        f"psi_hat={report.psi_hat:.4f}  alpha1={report.alpha1:.2f}  "
        f"alpha2={report.alpha2:.2f}"
    )
    smin = "n/a" if report.statistic_min is None else f"{report.statistic_min:.4f}"
    print(
        f"min {report.kind} over {report.ci['count']} retained drifts = {smin}  "
        f"cv={report.cv_alpha2:.4f}  decision: {report.decision}"
    )
    if args.with_ln_companion:
        companion = ln_stat(series.values, report.rho_hat, modified=True)
        print(
            f"companion LNstar at rho_hat = {companion.value:.4f} "
            "(null is nonstandard at an estimated coefficient; reference only)"
        )
    for flag in report.flags:
        print(f"note: {flag}")
    if args.out is not None:
        report.to_json(args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_size(args) -> int:
    cfg = ExperimentConfig(
        reps=args.reps, seed=args.seed, threads=args.threads,
        alpha2=args.alpha2,
    )
    cvtab = _load_cv_table(args.cv_table, args.threads)
    table = run_size(
        cfg,
        cvtab,
        Ts=args.t,
        rhos=args.rho,
        innovations=tuple(_INNOVATIONS[name] for name in args.innovations),
        alpha1_table=_load_alpha1_table(args.alpha1_table),
        grid=_grid_from(args),
    )
    _emit_frame(table, args.out)
    return 0


def _cmd_power(args) -> int:
    cfg = ExperimentConfig(
        reps=args.reps, seed=args.seed, threads=args.threads,
        alpha2=args.alpha2,
    )
    cvtab = _load_cv_table(args.cv_table, args.threads)
    table = run_power(
        cfg,
        cvtab,
        T=args.t,
        rhos=args.rho,
        corrs=args.corr,
        omega2s=args.omega2,
        kinds=args.kinds,
        alpha1_table=_load_alpha1_table(args.alpha1_table),
        grid=_grid_from(args),
        size_adjust=args.size_adjust,
    )
    _emit_frame(table, args.out)
    return 0


def _cmd_asymp_power(args) -> int:
    table = run_asymp_power(
        kinds=tuple(_KIND_BY_NAME[name] for name in args.kinds),
        c2_grid=np.asarray(args.c2),
        a=args.a,
        psi=args.psi,
        q_values=args.q,
        ratio=args.ratio,
        level=args.level,
        steps=args.steps,
        reps=args.reps,
        seed=args.seed,
        threads=args.threads,
    )
    _emit_frame(table, args.out)
    return 0


def _cmd_cvtable(args) -> int:
    if args.out is None:
        raise RcaTestError("cvtable needs --out to know where to write")
    tab = build_cv_table(
        a_grid=np.asarray(args.a_values) if args.a_values else None,
        levels=np.asarray(args.levels) if args.levels else None,
        cfg=PathConfig(steps=args.steps, reps=args.reps, seed=args.seed),
        threads=args.threads,
    )
    tab.to_csv(args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_calibrate(args) -> int:
    if args.out is None:
        raise RcaTestError("calibrate needs --out to know where to write")
    cvtab = _load_cv_table(args.cv_table, args.threads)
    table = calibrate_alpha1(
        cvtab,
        psi_grid=args.psi,
        a_grid=np.asarray(args.a_values) if args.a_values else None,
        T=args.t,
        reps=args.reps,
        alpha2=args.alpha2,
        target=args.target,
        grid=_grid_from(args),
        seed=args.seed,
        candidates=np.asarray(args.candidates) if args.candidates else None,
    )
    table.to_csv(args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_alpha1(args) -> int:
    table = DEFAULT_ALPHA1_TABLE  # --paper selects the shipped schedule
    if args.out is None:
        for row in table.rows:
            lo = "[" if row.openness[0] == "[" else "("
            hi = "]" if row.openness[1] == "]" else ")"
            print(f"{lo}{row.psi_lo:.2f}, {row.psi_hi:.2f}{hi}  alpha1={row.alpha1:.2f}")
    else:
        table.to_csv(args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for Monte Carlo batches")
    common.add_argument("--out", type=Path, default=None, help="output path")

    tables = argparse.ArgumentParser(add_help=False)
    tables.add_argument("--cv-table", default=None,
                        help="critical-value table CSV (auto-built if omitted)")
    tables.add_argument("--alpha1-table", default=None,
                        help="first-stage level schedule CSV (shipped default)")
    tables.add_argument("--grid", type=float, nargs=3, default=(-300.0, 20.0, 1.0),
                        metavar=("LO", "HI", "STEP"),
                        help="drift grid for the first stage")
    tables.add_argument("--alpha2", type=float, default=0.05,
                        help="second-stage level")

    parser = argparse.ArgumentParser(
        prog="rcatest",
        description="Tests for coefficient randomness in near-unit-root "
                    "autoregressions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="simulate one path and write it as CSV")
    p.add_argument("--length", "-T", type=int, required=True, dest="length",
                   help="number of transitions T")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--a", type=float, default=None,
                   help="local drift (rho = 1 + a/T)")
    p.add_argument("--omega2", type=float, default=None,
                   help="coefficient-noise variance")
    p.add_argument("--c2", type=float, default=None,
                   help="local coefficient-noise scale (omega2 = c2/T**1.5)")
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--kind", choices=("normal", "chisq"), default="normal")
    p.add_argument("--df", type=int, default=None, help="chisq degrees of freedom")
    p.add_argument("--corr", type=float, default=0.0)
    p.add_argument("--q", type=float, default=None,
                   help="localized correlation (corr = q/T**0.25)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("test", parents=[common, tables],
                       help="run the two-step test on a CSV series")
    p.add_argument("--input", required=True, help="CSV file")
    p.add_argument("--column", default="y", help="column name (default y)")
    p.add_argument("--column-index", type=int, default=None,
                   help="column position (overrides --column)")
    p.add_argument("--log", action="store_true", help="log-transform first")
    p.add_argument("--detrend", choices=("none", "linear"), default="none")
    p.add_argument("--kind", choices=("WaldStar", "AugTstar", "LNstar"),
                   default="WaldStar", help="second-stage statistic")
    p.add_argument("--per-point", action="store_true",
                   help="include per-drift detail in the report")
    p.add_argument("--with-ln-companion", action="store_true",
                   help="also print the LNstar value at the estimated "
                        "coefficient (reference only)")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("size", parents=[common, tables],
                       help="null rejection rates of the two-step test")
    p.add_argument("--t", type=_ints, default=[200, 500, 1000],
                   help="comma-separated sample sizes")
    p.add_argument("--rho", type=_floats,
                   default=[0.7, 0.8, 0.9, 0.95, 0.99, 1.0, 1.01],
                   help="comma-separated coefficients")
    p.add_argument("--innovations", type=lambda s: s.split(","),
                   default=["normal", "chisq10", "chisq1"],
                   help="comma-separated subset of normal,chisq10,chisq1")
    p.add_argument("--reps", type=int, default=5000)
    p.set_defaults(func=_cmd_size)

    p = sub.add_parser("power", parents=[common, tables],
                       help="finite-sample power against infeasible benchmarks")
    p.add_argument("--t", type=int, default=200)
    p.add_argument("--rho", type=_floats, default=[1.01, 1.0, 0.98, 0.95])
    p.add_argument("--corr", type=_floats, default=[0.0, 0.25, 0.5, 0.75])
    p.add_argument("--omega2", type=_floats,
                   default=[0.0025, 0.005, 0.0075, 0.01])
    p.add_argument("--kinds", type=lambda s: s.split(","),
                   default=["BonfWald", "InfeasibleWaldStar", "LNstarKnownRho"])
    p.add_argument("--size-adjust", action="store_true",
                   help="use simulated finite-sample null critical values")
    p.add_argument("--reps", type=int, default=20000)
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("asymp-power", parents=[common],
                       help="rejection rates of the limit laws")
    p.add_argument("--kinds", type=lambda s: s.split(","),
                   default=["LN", "AugT", "Wald"],
                   help="comma-separated statistic kinds")
    p.add_argument("--c2", type=_floats,
                   default=[0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5,
                            20.0, 22.5, 25.0, 27.5, 30.0])
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--psi", type=float, default=0.0)
    p.add_argument("--q", type=_floats, default=[0.0],
                   help="localized correlation values")
    p.add_argument("--ratio", type=float, default=2**-0.5,
                   help="sigma_eps**2/sigma_eta of the innovation law")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--reps", type=int, default=100_000)
    p.set_defaults(func=_cmd_asymp_power)

    p = sub.add_parser("cvtable", parents=[common],
                       help="simulate and write a critical-value table")
    p.add_argument("--a-values", type=_floats, default=None,
                   help="comma-separated drift grid (default: shipped grid)")
    p.add_argument("--levels", type=_floats, default=None,
                   help="comma-separated levels (default: both tails k/200)")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--reps", type=int, default=200_000)
    p.set_defaults(func=_cmd_cvtable)

    p = sub.add_parser("calibrate", parents=[common, tables],
                       help="calibrate the first-stage level schedule")
    p.add_argument("--psi", type=_floats, default=[0.0],
                   help="comma-separated skew-link values in [0, 1)")
    p.add_argument("--a-values", type=_floats, default=None,
                   help="true drifts (default -300..10 step 10)")
    p.add_argument("--t", type=int, default=2000)
    p.add_argument("--reps", type=int, default=5000)
    p.add_argument("--target", type=float, default=0.05)
    p.add_argument("--candidates", type=_floats, default=None,
                   help="candidate levels (default 0.01..0.60)")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("alpha1", parents=[common],
                       help="print or export the shipped first-stage schedule")
    p.add_argument("--paper", action="store_true",
                   help="select the shipped schedule (the default)")
    p.set_defaults(func=_cmd_alpha1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RcaTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
