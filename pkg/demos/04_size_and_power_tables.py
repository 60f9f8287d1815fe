"""Finite-sample size and power tables.

`run_size` simulates constant-coefficient series over a grid of (rho, T)
cells and reports how often each test rejects -- the numbers should hover
near the nominal level.  `run_power` holds rho at unity, switches on a
small coefficient variance, and compares the feasible two-step test with
an infeasible benchmark that knows the true rho.  Both emit a tidy
ResultTable that round-trips through CSV with a JSON metadata sidecar.
"""

import numpy as np

from rcatest import (
    ExperimentConfig,
    GridSpec,
    InnovationSpec,
    PathConfig,
    build_cv_table,
    run_power,
    run_size,
)

cvtab = build_cv_table(
    a_grid=np.array([-60.0, -30.0, -15.0, -8.0, -4.0, -2.0, 0.0, 2.0, 5.0, 10.0]),
    cfg=PathConfig(steps=400, reps=20000, seed=5),
)

cfg = ExperimentConfig(reps=1000, seed=0)
grid = GridSpec(-60.0, 10.0, 1.0)  # must stay inside the table's coverage

size = run_size(
    cfg, cvtab,
    Ts=(200,), rhos=(0.8, 0.9, 1.0, 1.01),
    innovations=(InnovationSpec("normal"),),
    grid=grid,
)
print("=== size across rho, normal innovations (nominal 0.05) ===")
print(size.to_frame()[["design", "T", "rho", "kind", "rate", "se"]]
      .to_string(index=False))

skew = run_size(
    cfg, cvtab,
    Ts=(200, 500), rhos=(1.0,),
    innovations=(InnovationSpec("chisq", df=1),),
    grid=grid,
)
print("\n=== size under heavily skewed innovations ===")
print(skew.to_frame()[["design", "T", "rho", "kind", "rate", "se"]]
      .to_string(index=False))
print("chi-square(1) innovations are about as skewed as it gets; the")
print("moment estimates behind the modification converge slowly, so the")
print("finite-sample size starts above nominal and falls as T grows.")

power = run_power(
    cfg, cvtab,
    T=200, rhos=(1.0,), corrs=(0.75,), omega2s=(0.01,),
    kinds=("BonfWald", "InfeasibleWaldStar", "LNstarKnownRho"),
    grid=grid,
)
print("\n=== power at omega2 = 0.01, corr = 0.75 ===")
print(power.to_frame()[["kind", "rho", "omega2", "c2", "rate", "se"]]
      .to_string(index=False))

print("\nThe feasible BonfWald tracks the known-rho Wald benchmark and, when")
print("the level innovation and coefficient shock are correlated, beats the")
print("one-sided score test that knows rho.")
