"""
The constrained value function and its convexity
================================================

psi(a) is the least average energy among periodic profiles with mean a.
It must be convex in a.  A single-harmonic search is not convex near
|a| = 0.85, where the true minimizers are long-period two-phase mixtures;
check_convexity repairs those points with spliced seeds.
"""

# %%
import time

import numpy as np

import lbperiodic as lb

params = lb.ModelParams(1.0, -0.5, 0.0)
a = np.linspace(-1.5, 1.5, 31)

t0 = time.perf_counter()
table = lb.sweep_mean(params, a)
print(f"sweep took {time.perf_counter() - t0:.1f} s")
print("midpoint violations before repair:", lb.landscape.convexity_violations(a, table.psi))

# %%
report = lb.check_convexity(table)
fixed = report.table
print("re-solved points:", report.resolved, " remaining:", report.violations)
for i in report.resolved:
    r = fixed.results[i]
    print(f"  a={a[i]:+.1f}  psi {table.psi[i]:.6f} -> {fixed.psi[i]:.6f}  period {r.profile.period:.0f}")

# %%
# psi against the constant-state energy h* and its convex envelope.
print("    a        psi         h*    envelope")
for i in range(0, 31, 3):
    print(f"{a[i]:+.2f}  {fixed.psi[i]:9.5f}  {fixed.hstar[i]:9.5f}  {fixed.envelope[i]:9.5f}")

lb.write_landscape_csv(fixed, "landscape_tau-0.5.csv")
print("wrote landscape_tau-0.5.csv")
