# %% [markdown]
# # Coverage as edges are removed
#
# Edges are deleted at random and each model is refit. Coverage is the
# fraction of edges that fall inside blocks.

# %%
import numpy as np

from rsbm.experiments import coverage_clusters, coverage_vs_density

res = coverage_vs_density("karate", n_trials=20, sweeps=2000)
header, rows = res.tables["coverage"]
print(header)
for r in rows[:8]:
    print(r)

# %% [markdown]
# Clusters of coverage values per model.

# %%
for model in ("dcsbm", "rsbm"):
    cov = np.array([r[-1] for r in rows if r[4] == model], dtype=float)
    for c in coverage_clusters(cov):
        print(f"{model}: {len(c):4d} values in [{c.min():.3f}, {c.max():.3f}]")
for c in res.checks:
    print("PASS" if c.passed else "FAIL", c.name, "|", c.detail)
