"""Where the first-stage level schedule comes from.

Splitting a 5% budget as 0.5% + 4.5% would be valid but wasteful: the
two stages are far from independent, so the worst-case overall size of
the two-step test is well below alpha1 + alpha2.  The shipped schedule
spends a much larger alpha1 -- up to 0.50 when the estimated skew is
moderate -- because simulation says the overall size still stays at or
below the nominal 5%.

`calibrate_alpha1` reproduces that construction: for each candidate
alpha1 it simulates the full two-step test across a grid of drifts and
skews, keeps the candidates whose worst-case rejection rate stays within
the target, and picks the largest.  Below we recalibrate a single
skew bin at demo scale and compare with the shipped value.
"""

import numpy as np

from rcatest import (
    DEFAULT_ALPHA1_TABLE,
    GridSpec,
    PathConfig,
    build_cv_table,
    calibrate_alpha1,
)

print("shipped schedule (|psi_hat| bin -> alpha1):")
for row in DEFAULT_ALPHA1_TABLE.rows:
    lo_b, hi_b = row.openness
    print(f"  {lo_b}{row.psi_lo:.2f}, {row.psi_hi:.2f}{hi_b}  "
          f"alpha1 = {row.alpha1:.2f}")

cvtab = build_cv_table(
    a_grid=np.array([-60.0, -30.0, -15.0, -8.0, -4.0, -2.0, 0.0, 2.0, 5.0, 10.0]),
    cfg=PathConfig(steps=400, reps=20000, seed=5),
)

print("\nrecalibrating the psi = 0 bin at demo scale ...")
table = calibrate_alpha1(
    cvtab,
    psi_grid=(0.0,),
    a_grid=(-50.0, -10.0, 0.0, 10.0),
    T=500,
    reps=500,
    seed=0,
    grid=GridSpec(-60.0, 10.0, 1.0),
)
row = table.rows[0]
print(f"demo-scale calibration picks alpha1 = {row.alpha1:.2f} "
      f"(shipped value for the smallest-|psi| bin: "
      f"{DEFAULT_ALPHA1_TABLE.rows[0].alpha1:.2f})")
cands = table.provenance["candidates"]
worst = table.provenance["worst_rates"][0]
for c in (0.01, row.alpha1, 0.30, 0.60):
    print(f"  candidate alpha1 = {c:.2f}: worst-case size {worst[cands.index(c)]:.3f}")
print("The size barely moves in alpha1 -- the two stages overlap heavily,")
print("which is exactly why a generous first stage costs so little.")
