# %% [markdown]
# # Reductions between the objectives
#
# Numerical checks of how the general objective collapses to the classical
# ones for particular choices of node factors.

# %%
import numpy as np

from rsbm import (NodeFactors, Partition, PriorSpec, Model, compute_block_stats, from_edges,
                  dcsbm_objective, fit_theta, general_objective, information_form_objective,
                  objective, ssbm_objective)
from rsbm.models import expected_degrees

rng = np.random.default_rng(0)


def random_graph(n, m):
    while True:
        e = rng.integers(n, size=(m, 2))
        g = from_edges(e, node_count=n)
        if g.degree.min() > 0:
            return g


g = random_graph(10, 25)
p, q = Partition.random(10, 3, rng), Partition.random(10, 3, rng)
sp, sq = compute_block_stats(g, p), compute_block_stats(g, q)

# %% [markdown]
# Unit factors give the standard model.

# %%
print(general_objective(sp, NodeFactors.unit(10)), ssbm_objective(sp))

# %% [markdown]
# With `f = 1/2` and fitted `theta`, differences between partitions match the
# degree-corrected model.

# %%
half = PriorSpec.explicit(np.full(10, 0.5))
lp = objective(sp, Model.rsbm(half.with_theta(fit_theta(sp, half))))
lq = objective(sq, Model.rsbm(half.with_theta(fit_theta(sq, half))))
print(lp - lq, dcsbm_objective(sp) - dcsbm_objective(sq))

# %% [markdown]
# Using the internal and external degrees as factors gives an
# information-theoretic form up to partition-independent constants.

# %%
k = g.degree.astype(float)
lhs = general_objective(sp, NodeFactors(sp.kplus.astype(float), sp.kminus.astype(float)))
rhs = 2 * g.m * (information_form_objective(sp) - np.log(2 * g.m)) + 2 * np.sum(k * np.log(k))
print(lhs, rhs)

# %% [markdown]
# At the fitted `theta`, expected degrees equal observed degrees.

# %%
spec = PriorSpec.alpha_form(0.6)
theta = fit_theta(sp, spec)
f = spec.ratios(g.degree)
print(np.round(expected_degrees(sp, NodeFactors(f * theta, (1 - f) * theta)), 6))
print(g.degree)
