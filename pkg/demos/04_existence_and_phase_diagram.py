"""
When does a periodic pattern win?
=================================

A nontrivial periodic minimizer at mean 0 is guaranteed when psi(0) lies
below m_f, the best constant state.  This compares the two across tau and
then looks at the convex envelope of h*, which one might hope equals psi.
"""

# %%
import numpy as np

import lbperiodic as lb

grid = np.array([-0.1, 0.0, 0.1])
print("  tau     psi(0)       m_f   holds  period")
for tau in (-3.0, -2.0, -1.0, -0.5, -0.1, 0.5, 1.0):
    params = lb.ModelParams(1.0, tau, 0.0)
    rep = lb.existence_condition(params, lb.sweep_mean(params, grid))
    period = "-" if rep.minimizer_period is None else f"{rep.minimizer_period:.3f}"
    print(f"{tau:+.1f}  {rep.psi_at_zero:9.5f}  {rep.m_f:8.4f}  {rep.condition_holds!s:>5}  {period}")

# %%
# Below tau = -1 the constant states themselves split into two wells and the
# envelope of h* is flat between them.  Periodic profiles still do better,
# so on this grid the envelope is not the value function.
params = lb.ModelParams(1.0, -2.0, 0.0)
table = lb.sweep_mean(params, np.linspace(-1.0, 1.0, 11))
gap = lb.conjecture_gap(table)
print(f"max envelope - psi = {gap.max_gap:.4f} at a = {gap.max_gap_at:+.2f}")
print("evidence against envelope = psi:", gap.evidence_against_equality)
print("(psi is only a computed upper bound, so this is evidence, not proof)")

# %%
# The same classification over a (tau, gamma) grid is available from the CLI:
#   lbperiodic phase-diagram --xi 1 --jobs 4 -o phase.csv
