"""Metropolis-Hastings inference over fixed-B partitions.

Moves use the neighbor-informed proposal: pick a neighbor ``j`` of the node
uniformly (by edge multiplicity), let ``t = g_j`` and propose block ``s`` with
probability ``(m_ts + eps) / (kappa_t + eps B)``. The Hastings ratio
evaluates the reverse proposal on the post-move block counts, which makes
each single-node update exactly reversible for ``pi ~ exp(L)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .blocks import BlockStats, Partition, compute_block_stats
from .graph import Multigraph
from .metrics import coverage, modularity
from .models import Model, PriorSpec, objective


@dataclass(frozen=True)
class MCMCConfig:
    n_blocks: int
    model: Model
    epsilon: float = 0.1
    sweeps: int = 1000
    seed: int = 0
    record_every: int = 1
    record_unit: str = "sweep"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.n_blocks < 1 or self.sweeps < 0 or self.record_every < 1:
            raise ValueError("invalid block count, sweep count or record interval")
        if self.record_unit not in ("sweep", "move"):
            raise ValueError("record_unit must be 'sweep' or 'move'")


@dataclass
class Trace:
    """Recorded history of one chain.

    ``steps[k]`` is the sweep index after which record ``k`` was taken (0 is
    the initial state). With ``record_unit='move'``, ``move_objectives`` holds
    the objective after every proposal.
    """

    seed: int
    steps: np.ndarray
    objectives: np.ndarray
    acceptance: np.ndarray
    partitions: np.ndarray
    final: Partition
    best: Partition
    best_objective: float
    move_objectives: np.ndarray | None = None

    @property
    def best_so_far(self) -> np.ndarray:
        return np.maximum.accumulate(self.objectives)

    def first_reach(self, level: float, tol: float = 1e-6) -> int | None:
        """First recorded sweep whose objective is within ``tol`` of ``level``."""
        hit = np.flatnonzero(self.objectives >= level - tol)
        return int(self.steps[hit[0]]) if len(hit) else None

    def to_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "steps": self.steps.tolist(),
            "objectives": [round(float(x), 10) for x in self.objectives],
            # the initial record has no acceptance rate; stored as null
            "acceptance": [None if np.isnan(x) else round(float(x), 10) for x in self.acceptance],
            "partitions": self.partitions.tolist(),
            "n_blocks": self.final.n_blocks,
            "final": self.final.assignment.tolist(),
            "best": self.best.assignment.tolist(),
            "best_objective": round(float(self.best_objective), 10),
        }
        if self.move_objectives is not None:
            d["move_objectives"] = [round(float(x), 10) for x in self.move_objectives]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Trace":
        B = d["n_blocks"]
        mo = d.get("move_objectives")
        return cls(d["seed"], np.asarray(d["steps"]), np.asarray(d["objectives"]),
                   np.array([np.nan if x is None else x for x in d["acceptance"]], dtype=float),
                   np.asarray(d["partitions"], dtype=np.int64),
                   Partition(d["final"], B), Partition(d["best"], B), d["best_objective"],
                   None if mo is None else np.asarray(mo))


class Chain:
    """Mutable chain state: block statistics plus the model's factor sums."""

    def __init__(self, graph: Multigraph, model: Model, partition: Partition,
                 epsilon: float = 0.1):
        if len(partition) != graph.node_count:
            raise ValueError("partition length must equal node count")
        self.graph = graph
        self.model = model
        self.epsilon = float(epsilon)
        self.stats = compute_block_stats(graph, partition)
        I, O, a, b = model.terms(graph.degree)
        B = partition.n_blocks
        g = self.stats.assignment
        self.I, self.O, self.d = I, O, a - b
        self.SI, self.SO = K.block_sums(I, g, B), K.block_sums(O, g, B)
        self.nzI, self.nzO = K.nonzero_counts(I, g, B), K.nonzero_counts(O, g, B)
        self.objective = objective(self.stats, model)
        self.best_objective = self.objective
        self.best_assignment = g.copy()
        self._frozen = False

    @property
    def partition(self) -> Partition:
        return self.stats.partition

    @property
    def n_blocks(self) -> int:
        return self.stats.n_blocks

    def recomputed_objective(self) -> float:
        return objective(self.stats, self.model)

    def _kernel(self, order, u, out_obj, out_acc, out_parts, out_moves):
        g, s = self.graph, self.stats
        self.objective, self.best_objective = K.run_sweeps(
            order, u, self.epsilon, g.indptr, g.indices, g.weights, g.degree,
            s.assignment, s.M, s.kappa, s.sizes, s.kplus, self.I, self.O, self.SI, self.SO,
            self.nzI, self.nzO, self.d, self.objective, self.best_objective,
            self.best_assignment, out_obj, out_acc, out_parts, out_moves, self._frozen)

    def sweep(self, rng) -> float:
        """One pass over all nodes in random order; returns the acceptance rate."""
        return float(self.run(1, rng)["acceptance"][0])

    def run(self, n_sweeps: int, rng, record_parts: bool = False,
            record_moves: bool = False) -> dict:
        """Run ``n_sweeps`` sweeps, returning per-sweep objective and acceptance
        (and optionally every partition and every per-move objective)."""
        n = self.graph.node_count
        obj = np.empty(n_sweeps)
        acc = np.empty(n_sweeps)
        parts = np.empty((n_sweeps if record_parts else 0, n), dtype=np.int64)
        moves = np.empty((n_sweeps if record_moves else 0, n))
        chunk = max(1, 65536 // max(n, 1))
        base = np.tile(np.arange(n, dtype=np.int64), (chunk, 1))
        for lo in range(0, n_sweeps, chunk):
            c = min(chunk, n_sweeps - lo)
            order = rng.permuted(base[:c], axis=1)
            u = rng.random((c, n, 3))
            self._kernel(order, u, obj[lo:lo + c], acc[lo:lo + c],
                         parts[lo:lo + c] if record_parts else parts,
                         moves[lo:lo + c] if record_moves else moves)
        return {"objective": obj, "acceptance": acc, "partitions": parts, "moves": moves}


# ------------------------------------------------------------ single moves

def propose_move(stats: BlockStats, node: int, g: Multigraph, epsilon: float, rng) -> int:
    """Draw a candidate block for ``node`` from the neighbor-informed proposal."""
    u = rng.random(2)
    return int(K.propose(node, u[0], u[1], g.indptr, g.indices, g.weights, stats.assignment,
                         stats.M, stats.kappa, float(epsilon), g.degree))


def proposal_probabilities(stats: BlockStats, node: int, g: Multigraph, epsilon: float) -> np.ndarray:
    """Full distribution of :func:`propose_move` over the blocks."""
    B = stats.n_blocks
    if g.degree[node] == 0:
        return np.full(B, 1.0 / B)
    r = stats.assignment[node]
    return np.array([K.proposal_mass(node, s, r, g.indptr, g.indices, g.weights,
                                     stats.assignment, stats.M, stats.kappa, float(epsilon))
                     for s in range(B)]) / g.degree[node]


def acceptance_probability(stats: BlockStats, node: int, s: int, delta: float,
                           g: Multigraph, epsilon: float) -> float:
    """``min(1, exp(delta) q(s -> r) / q(r -> s))`` with the reverse proposal
    evaluated after the move."""
    r = int(stats.assignment[node])
    if r == s or g.degree[node] == 0:
        return min(1.0, math.exp(min(delta, 0.0)))
    from .blocks import apply_move
    fwd = K.proposal_mass(node, s, r, g.indptr, g.indices, g.weights, stats.assignment,
                          stats.M, stats.kappa, float(epsilon))
    after = apply_move(stats.copy(), node, s, g)
    bwd = K.proposal_mass(node, r, s, g.indptr, g.indices, g.weights, after.assignment,
                          after.M, after.kappa, float(epsilon))
    log_a = delta + math.log(bwd) - math.log(fwd)
    return 1.0 if log_a >= 0 else math.exp(log_a)


def sweep(chain: Chain, rng) -> Chain:
    chain.sweep(rng)
    return chain


# ------------------------------------------------------------------ trials

def run_trial(g: Multigraph, cfg: MCMCConfig, init: Partition | None = None,
              seed: int | None = None) -> Trace:
    """One chain of ``cfg.sweeps`` sweeps from a random (or given) partition."""
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    if init is None:
        init = Partition.random(g.node_count, cfg.n_blocks, rng)
    elif init.n_blocks != cfg.n_blocks:
        init = Partition(init.assignment, cfg.n_blocks)
    chain = Chain(g, cfg.model, init, cfg.epsilon)
    first = chain.objective
    out = chain.run(cfg.sweeps, rng, record_parts=True, record_moves=cfg.record_unit == "move")
    keep = np.arange(cfg.record_every - 1, cfg.sweeps, cfg.record_every)
    steps = np.concatenate([[0], keep + 1])
    objectives = np.concatenate([[first], out["objective"][keep]])
    acceptance = np.concatenate([[np.nan], out["acceptance"][keep]])
    partitions = np.vstack([init.assignment[None, :], out["partitions"][keep]])
    moves = out["moves"].ravel() if cfg.record_unit == "move" else None
    # best-seen is tracked over every sweep, recorded or not
    return Trace(seed, steps, objectives, acceptance, partitions, chain.partition,
                 Partition(chain.best_assignment.copy(), cfg.n_blocks),
                 float(chain.best_objective), moves)


def run_trials(g: Multigraph, cfg: MCMCConfig, n_trials: int, parallelism: int = 1,
               init: Partition | None = None) -> list[Trace]:
    """Independent chains with seeds ``cfg.seed + t``; results do not depend on
    ``parallelism``."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    seeds = [cfg.seed + t for t in range(n_trials)]
    if parallelism <= 1:
        return [run_trial(g, cfg, init, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda s: run_trial(g, cfg, init, s), seeds))


@dataclass
class AnnealStep:
    f: float
    partition: Partition
    objective: float
    coverage: float
    modularity: float


def anneal_f(g: Multigraph, f_schedule, cfg: MCMCConfig, prior: str = "floor_form",
             init: Partition | None = None) -> list[AnnealStep]:
    """Warm-started sweep over the prior ratio ``f``.

    Step ``j`` runs one chain under the regularized model with ratio ``f_j``
    starting from the best partition of step ``j - 1`` (step 0 from ``init``
    or random). Seeds are ``cfg.seed + j``.
    """
    fs = np.asarray(list(f_schedule), dtype=float)
    if np.any(np.diff(fs) <= 0) or np.any((fs <= 0) | (fs >= 1)):
        raise ValueError("schedule must be strictly increasing inside (0, 1)")
    make = PriorSpec.floor_form if prior == "floor_form" else PriorSpec.alpha_form
    out = []
    current = init
    for j, f in enumerate(fs):
        step_cfg = replace(cfg, model=Model.rsbm(make(f)))
        tr = run_trial(g, step_cfg, current, seed=cfg.seed + j)
        current = tr.best
        st = compute_block_stats(g, tr.best)
        out.append(AnnealStep(float(f), tr.best, tr.best_objective, coverage(st), modularity(st)))
    return out


def plateaus(values, tol: float = 1e-6) -> list[tuple[float, int]]:
    """Group objective levels within ``tol``; returns ``(level, count)`` sorted
    from the highest level down."""
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    groups: list[list[float]] = []
    for x in v:
        if groups and groups[-1][0] - x <= tol:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(grp[0], len(grp)) for grp in groups]
