# %% [markdown]
# # Two spins, and one spin with hidden variables

# %%
from kslab.mermin import (
    assignment_search,
    bell_eps_product_check,
    born_rule_check,
    mermin_relations_check,
    standard_angle_sequence,
)

print(max(mermin_relations_check().values()))
ref = assignment_search()
print(f"{ref.consistent} of {ref.total} assignments survive")
print(ref.traces[0])

# %%
rows = born_rule_check(100_000, 5, seed=1)
for i, theta, expected, empirical, z in rows:
    print(f"pair {i}: theta={theta:.3f}  cos^2={expected:.4f}  sampled={empirical:.4f}  z={z:.2f}")

# %%
n_hat, dirs = standard_angle_sequence()
chk = bell_eps_product_check(n_hat, dirs, 0.3, 100_000, seed=1)
for t, r in zip(chk.angles, chk.pass_rates):
    print(f"angle {t:.4f}: pass rate {r:.4f}")
