"""
Lagrangian duality
==================

Minimizing average_energy - lam * mean over all profiles gives the
concave conjugate of psi: psi_lam = min_a psi(a) - lam a.  Both sides are
computed independently and compared.
"""

# %%
import numpy as np

import lbperiodic as lb

params = lb.ModelParams(1.0, -0.5, 0.0)
table = lb.sweep_mean(params, np.linspace(-0.5, 0.5, 41))
dual = lb.sweep_lambda(params, np.linspace(-0.2, 0.2, 5))

# %%
rep = lb.check_duality(table, dual)
print("  lam    psi_lam   grid min   optimal mean")
for lam, pd, gm, m in zip(rep.lambda_grid, rep.psi_dual, rep.grid_min, dual.mean_at_opt):
    print(f"{lam:+.2f}  {pd:9.6f}  {gm:9.6f}  {m:+.4f}")
print(f"max deviation {rep.max_abs_deviation:.2e}; dual above grid at {rep.higher_indices}")

# %%
# The optimal mean moves with lam; its slope is the inverse curvature of psi.
slope = np.polyfit(dual.lambda_grid, dual.mean_at_opt, 1)[0]
print(f"d mean / d lam = {slope:.3f}")
