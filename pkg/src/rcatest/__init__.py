"""Tests for coefficient randomness in near-unit-root autoregressions.

The package simulates first-order autoregressions whose coefficient carries
a small random perturbation, computes score / t / Wald statistics for the
hypothesis that the perturbation variance is zero, modifies them so their
null laws are pivotal under skewed innovations, and wraps the modified Wald
statistic in a two-step Bonferroni procedure that stays valid when the
autoregressive coefficient is unknown and possibly (near-)unity.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .bonferroni import (
    Alpha1Row,
    Alpha1Table,
    ConfidenceSet,
    DEFAULT_ABAR_GRID,
    DEFAULT_ALPHA1_TABLE,
    GridSpec,
    TestReport,
    bonferroni_test,
    calibrate_alpha1,
    confidence_set,
    lookup_alpha1,
)
from .dataio import EmpiricalConfig, ingest, read_series_csv, write_series_csv
from .errors import (
    CalibrationError,
    DegenerateSeriesError,
    IngestError,
    ModificationError,
    ParameterError,
    PsiUndefinedError,
    RankDeficiencyError,
    RcaTestError,
    TableError,
)
from .estimate import (
    NuisanceEstimates,
    Residuals,
    RhoEstimate,
    nuisance_estimates,
    residuals,
    rho_ols,
    t_rho,
)
from .experiments import (
    ExperimentConfig,
    ResultTable,
    run_asymp_power,
    run_power,
    run_size,
)
from .limitdist import (
    CriticalValueTable,
    FunctionalDraws,
    PathConfig,
    PowerCurve,
    asymptotic_power_curve,
    build_cv_table,
    draw_functionals,
    limit_stat,
)
from .simulate import (
    InnovationSpec,
    RcaParams,
    Series,
    eta_replacement,
    gen_innovations,
    replaced_z2,
    simulate_rca,
)
from .teststats import (
    AugmentedFit,
    StatKind,
    StatValue,
    aug_t_stat,
    augmented_fit,
    ln_stat,
    modify_z2,
    pivotal_critical_value,
    wald_stat,
)

__all__ = [
    "__version__",
    # simulate
    "InnovationSpec", "RcaParams", "Series", "gen_innovations",
    "simulate_rca", "eta_replacement", "replaced_z2",
    # estimate
    "Residuals", "NuisanceEstimates", "RhoEstimate", "residuals",
    "nuisance_estimates", "rho_ols", "t_rho",
    # teststats
    "StatKind", "StatValue", "AugmentedFit", "modify_z2", "augmented_fit",
    "ln_stat", "aug_t_stat", "wald_stat", "pivotal_critical_value",
    # limitdist
    "PathConfig", "FunctionalDraws", "CriticalValueTable", "PowerCurve",
    "draw_functionals", "limit_stat", "build_cv_table",
    "asymptotic_power_curve",
    # bonferroni
    "Alpha1Row", "Alpha1Table", "GridSpec", "ConfidenceSet", "TestReport",
    "DEFAULT_ALPHA1_TABLE", "DEFAULT_ABAR_GRID", "lookup_alpha1",
    "confidence_set", "bonferroni_test", "calibrate_alpha1",
    # experiments
    "ExperimentConfig", "ResultTable", "run_size", "run_power",
    "run_asymp_power",
    # dataio
    "EmpiricalConfig", "ingest", "write_series_csv", "read_series_csv",
    # errors
    "RcaTestError", "ParameterError", "DegenerateSeriesError",
    "PsiUndefinedError", "ModificationError", "RankDeficiencyError",
    "TableError", "CalibrationError", "IngestError",
]
