# %% [markdown]
# # From premises to a contradiction certificate

# %%
from kslab import contradiction_certificate, run_audit
from kslab.audit import DEFAULT_AUDIT_STATE

rep = run_audit(N=4096, n=8, delta=0.05, states=DEFAULT_AUDIT_STATE)
print("verdict:", rep.verdict["overall"])
print(f"epsilon = {rep.epsilon:.6f}, P(|v1 v2| >= 3 eps) = {rep.p_threshold:.4f}")

# %%
for key, value in rep.premise_residuals.items():
    print(f"{key:>44s}  {value:.3e}")

# %%
c = rep.certificate
print(f"|x - y| <= {c.upper_gap:.4f} but |x - y| = 2|z| >= {c.lower_gap:.4f}")

# %%
# shrinking z below 2 eps removes the contradiction
for z in (0.1, 0.2, 0.3):
    print(z, contradiction_certificate(0.1, z).contradiction)
