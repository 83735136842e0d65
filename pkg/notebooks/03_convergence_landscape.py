# %% [markdown]
# # Convergence on a planted instance
#
# Twenty MCMC trials per model on a small two-block power-law instance,
# followed by an MDS map of every visited partition.

# %%
import numpy as np

from rsbm.experiments import CONVERGENCE_INSTANCE, convergence_experiment

print(CONVERGENCE_INSTANCE)
res = {m: convergence_experiment(m, n_trials=20, sweeps=300, landscape_points=600)
       for m in ("dcsbm", "rsbm")}

# %% [markdown]
# Final objective levels reached by the trials, grouped into plateaus.

# %%
for m, r in res.items():
    print(m, r.documents["summary"]["plateaus"])
    for c in r.checks:
        print("   ", "PASS" if c.passed else "FAIL", c.name, "|", c.detail)

# %% [markdown]
# Objective traces: first sweep reaching the best level, per trial.

# %%
for m, r in res.items():
    header, rows = r.tables["trials"]
    print(m, header)
    for row in rows[:5]:
        print("   ", row)

# %% [markdown]
# Landscape coordinates. Points with trial `-1` are interpolations between
# visited partitions.

# %%
header, rows = res["rsbm"].tables["landscape"]
xy = np.array([r[:3] for r in rows], dtype=float)
print(header, len(rows), "points")
print("objective range", xy[:, 2].min(), xy[:, 2].max())
