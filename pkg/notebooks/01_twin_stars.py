# %% [markdown]
# # Twin stars
#
# Two five-node stars joined hub to hub. Three candidate 2-block splits are
# scored under the standard, degree-corrected and regularized objectives.

# %%
import numpy as np

from rsbm import Partition, compute_block_stats, twin_stars
from rsbm.experiments import TWIN_STARS_COLUMNS, TWIN_STARS_ROWS, twin_stars_table
from rsbm.graph import TWIN_STARS_PARTITIONS
from rsbm.models import objective_terms, Model, PriorSpec

g = twin_stars()
print(g.node_count, "nodes,", g.m, "edges, degrees", g.degree.tolist())
for name in TWIN_STARS_COLUMNS:
    print(f"{name:>15}", TWIN_STARS_PARTITIONS[name])

# %% [markdown]
# Rows are models, columns are partitions. The winning column per row is
# marked with `*`.

# %%
T = twin_stars_table()
print(" " * 16 + "".join(f"{c:>16}" for c in TWIN_STARS_COLUMNS))
for name, row in zip(TWIN_STARS_ROWS, T):
    best = row.argmax()
    print(f"{name:<16}" + "".join(f"{v:>15.5f}{'*' if j == best else ' '}"
                                  for j, v in enumerate(row)))

# %% [markdown]
# The huge negative core-periphery scores come from empty internal blocks:
# a leaf with `f = 1` keeps all its weight on internal edges, so a block with
# no internal edges hits the log floor.

# %%
cp = compute_block_stats(g, Partition(TWIN_STARS_PARTITIONS["core-periphery"], 2))
for a in (0.3, 0.9):
    print(a, objective_terms(cp, Model.rsbm(PriorSpec.alpha_form(a))))
