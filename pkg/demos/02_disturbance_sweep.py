# %% [markdown]
# # Disturbance shrinks with the family index
#
# ``||Delta(B1; A2n) psi||`` for the standard state family, n = 2 .. 32,
# each on its own resolving grid.

# %%
import numpy as np

from kslab import convergence_sweep
from kslab.report import emit_plot

sweep = convergence_sweep([2, 4, 8, 16, 32], k_max=2)
peaks = sweep.max_delta(1)
for n, v in peaks.items():
    print(f"n={n:3d}  N={sweep.grids[n]:7d}  max ||Delta psi|| = {v:.5f}")
print(f"log-log slope {sweep.fit[0]:.3f}")

# %%
# n ** -0.5 scaling: the normalized column should be roughly flat
for n, v in peaks.items():
    print(f"n={n:3d}  sqrt(n) * max = {np.sqrt(n) * v:.4f}")

# %%
# the symmetrized column is identically zero
print("largest sym_delta_norm:", max(r.sym_delta_norm for r in sweep.rows))

# %%
path = emit_plot(
    [("max over states", sorted(peaks.items()))],
    "disturbance_sweep.svg",
    log_log=True,
    title="Delta(B1; A2n)",
    xlabel="n",
    ylabel="norm",
)
print("wrote", path)
