"""Poisson multigraph samplers for the block models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import Partition
from .graph import Multigraph
from .models import NodeFactors


@dataclass(frozen=True)
class PlantedParams:
    n_blocks: int
    omega0: float
    gamma: float
    block_sizes: tuple[int, ...] | None = None

    def partition(self) -> Partition:
        sizes = self.block_sizes or (1,) * self.n_blocks
        return Partition(np.repeat(np.arange(self.n_blocks), sizes), self.n_blocks)


def planted_omega(params: PlantedParams) -> np.ndarray:
    """``gamma * omega0`` on the diagonal, ``omega0`` elsewhere."""
    if params.omega0 <= 0 or params.gamma < 0:
        raise ValueError("need omega0 > 0 and gamma >= 0")
    om = np.full((params.n_blocks, params.n_blocks), float(params.omega0))
    np.fill_diagonal(om, params.gamma * params.omega0)
    return om


def sample_powerlaw_degrees(n: int, exponent: float, k_min: int = 1, seed: int = 0) -> np.ndarray:
    """i.i.d. draws from ``P(k) ~ k^-exponent`` on ``[k_min, max(k_min, n - 1)]``
    by inverting the discrete CDF."""
    if exponent <= 1 or n < 1:
        raise ValueError("need exponent > 1 and n >= 1")
    k = np.arange(k_min, max(k_min, n - 1) + 1)
    cdf = np.cumsum(k.astype(float) ** -exponent)
    cdf /= cdf[-1]
    u = np.random.default_rng(seed).random(n)
    return k[np.minimum(np.searchsorted(cdf, u, side="right"), len(k) - 1)]


def _sample_from_rates(lam: np.ndarray, rng) -> Multigraph:
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise ValueError("Poisson rates must be finite and nonnegative")
    n = len(lam)
    iu, ju = np.triu_indices(n, k=1)
    cnt = rng.poisson(lam[iu, ju])
    loops = rng.poisson(np.diag(lam) / 2.0)
    src = np.concatenate([np.repeat(iu, cnt), np.repeat(np.arange(n), loops)])
    dst = np.concatenate([np.repeat(ju, cnt), np.repeat(np.arange(n), loops)])
    return Multigraph(n, np.column_stack([src, dst]))


def dcsbm_rates(p: Partition, omega, degrees, normalize: bool = False) -> np.ndarray:
    """``lambda_ij = omega_{g_i g_j} beta_i beta_j``.

    By default ``beta_i = k_i``, so ``omega`` acts as a per-edge-end density
    and ``omega0`` sets the sparsity directly. With ``normalize=True``,
    ``beta_i = k_i / kappa_{g_i}`` and ``omega_rs`` is the expected ``m_rs``.
    """
    omega = np.asarray(omega, dtype=float)
    if not np.allclose(omega, omega.T):
        raise ValueError("omega must be symmetric")
    k = np.asarray(degrees, dtype=float)
    if len(k) != len(p):
        raise ValueError("one degree per node required")
    g = p.assignment
    beta = k
    if normalize:
        kap = np.bincount(g, weights=k, minlength=p.n_blocks)
        beta = np.where(kap[g] > 0, k / np.where(kap[g] > 0, kap[g], 1), 0.0)
    return omega[np.ix_(g, g)] * np.outer(beta, beta)


def rsbm_rates(p: Partition, omega, factors: NodeFactors) -> np.ndarray:
    """``omega I_i I_j`` inside a block, ``omega O_i O_j`` across."""
    omega = np.asarray(omega, dtype=float)
    g = p.assignment
    same = g[:, None] == g[None, :]
    pair = np.where(same, np.outer(factors.I, factors.I), np.outer(factors.O, factors.O))
    return omega[np.ix_(g, g)] * pair


def sample_dcsbm(p: Partition, omega, degrees, seed: int, normalize: bool = False) -> Multigraph:
    return _sample_from_rates(dcsbm_rates(p, omega, degrees, normalize), np.random.default_rng(seed))


def sample_rsbm(p: Partition, omega, factors: NodeFactors, seed: int) -> Multigraph:
    return _sample_from_rates(rsbm_rates(p, omega, factors), np.random.default_rng(seed))


def planted_instance(n_per_block: int = 10, n_blocks: int = 2, omega0: float = 0.01,
                     gamma: float = 10.0, exponent: float = 2.5, k_min: int = 1,
                     seed: int = 0, drop_isolated: bool = True,
                     giant_component: bool = False, simple: bool = False):
    """Degree-corrected planted-partition graph with power-law propensities.

    Returns ``(graph, planted partition)``. Block labels are shuffled so the
    planted partition is not contiguous in node order. With
    ``drop_isolated`` nodes that received no edge are removed from both;
    ``giant_component`` keeps only the largest connected component;
    ``simple`` collapses multi-edges and drops self-loops first.
    """
    rng = np.random.default_rng(seed)
    n = n_per_block * n_blocks
    params = PlantedParams(n_blocks, omega0, gamma, (n_per_block,) * n_blocks)
    labels = rng.permutation(params.partition().assignment)
    p = Partition(labels, n_blocks)
    deg = sample_powerlaw_degrees(n, exponent, k_min, seed=int(rng.integers(2**31)))
    g = sample_dcsbm(p, planted_omega(params), deg, seed=int(rng.integers(2**31)))
    if simple:
        g = g.simple()
    if giant_component:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        e = g.edges
        adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        _, comp = connected_components(adj, directed=False)
        # largest component by node count, ignoring isolated nodes
        sizes = np.bincount(comp, weights=(g.degree > 0).astype(float))
        alive = (comp == np.argmax(sizes)) & (g.degree > 0)
    elif drop_isolated:
        alive = g.degree > 0
    else:
        alive = np.ones(n, dtype=bool)
    if not alive.all():
        new_id = np.cumsum(alive) - 1
        e = g.edges[alive[g.edges[:, 0]]]
        g = Multigraph(int(alive.sum()), new_id[e])
        p = Partition(p.assignment[alive], n_blocks)
    return g, p
