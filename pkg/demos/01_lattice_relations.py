# %% [markdown]
# # Exact relations on a commensurate torus
#
# Build the n = 2 family on a 512-site lattice and look at which pairs
# commute, which anticommute, and the one pair that does neither.

# %%
import numpy as np

from kslab import make_family, relation_suite
from kslab.kscons import near_solution, weyl_check
from kslab.states import build_states

fam = make_family(512, 2)
states = build_states(fam.cfg)
print(f"L = {fam.L:.4f}, dx = {fam.cfg.dx:.4f}")
print(f"b1 spans {fam.b1_sites} sites, b2n spans {fam.b2n_sites} sites")

# %%
table = relation_suite(fam, states)
for name, value in table.items():
    print(f"{name:>16s}  {value:.3e}")

# %% [markdown]
# Everything sits at roundoff except ``comm_A2n_B1``, which is order one.

# %%
for name, value in weyl_check(fam, states).items():
    print(f"{name:>28s}  {value:.3e}")

# %%
# the products a_i b_j against the integer system with no solution
for key, val in near_solution(2).items():
    print(f"{key:>20s}  {val:.6f}")

# %%
# the sign flip of cos(a2n q) under a b1 shift lands on a thin set of sites
q = fam.cfg.q_samples
moved = np.sign(np.cos(fam.a2n * q - fam.eps_n)) != np.sign(np.cos(fam.a2n * q))
print(f"sites whose A2n value moves: {moved.mean():.3f} (eps_n / pi = {fam.eps_n / np.pi:.3f})")
