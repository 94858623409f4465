"""Observed convergence orders by Cauchy refinement.

There is no exact solution to compare against, so the errors are the
differences between runs at successive resolutions.  This is a smaller
version of the acceptance study; it takes a few seconds.
"""

from mac_sav_zec.scheme import Params
from mac_sav_zec.studies import convergence_space, convergence_time

# %%
# Time: halve tau three times on a 64^2 grid.
base = Params(epsilon=0.1, nu=1.0, lam=1.0, tau=8e-3, n_cells=64, t_end=0.1)
for var, rep in convergence_time(base, levels=3).items():
    print(var, [f"{e:.3e}" for _, e in rep.levels], [round(o, 3) for o in rep.observed_orders])

# %%
# Space: double N three times with a tiny time step.
base = Params(epsilon=0.1, nu=1.0, lam=1.0, tau=1e-4, n_cells=16, t_end=0.02)
for var, rep in convergence_space(base, levels=3).items():
    print(var, [f"{e:.3e}" for _, e in rep.levels], [round(o, 3) for o in rep.observed_orders])

# %%
# Starting BDF2 from a copied level is only first order; the default for
# the studies is a single backward Euler start-up step.
base = Params(epsilon=0.1, nu=1.0, lam=1.0, tau=8e-3, n_cells=64, t_end=0.1)
rep = convergence_time(base, levels=3, startup="copy_level")["phi_h1"]
print("copy_level start:", [round(o, 3) for o in rep.observed_orders])
