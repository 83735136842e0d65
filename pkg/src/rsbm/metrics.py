"""Partition quality scores, partition distances and landscape projection."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockStats, Partition, compute_block_stats


def coverage(stats: BlockStats) -> float:
    """Fraction of edges with both endpoints in one block."""
    if stats.two_m == 0:
        raise ValueError("coverage is undefined for an empty graph")
    return float(np.trace(stats.M) / stats.two_m)


def modularity(stats: BlockStats) -> float:
    """Newman-Girvan modularity ``sum_r m_rr/2m - (kappa_r/2m)^2``."""
    two_m = stats.two_m
    if two_m == 0:
        raise ValueError("modularity is undefined for an empty graph")
    return float(np.sum(np.diag(stats.M) / two_m - (stats.kappa / two_m) ** 2))


def _labels(p):
    return p.assignment if isinstance(p, Partition) else np.asarray(p, dtype=np.int64)


def partition_distance(p, q, max_exact_blocks: int = 8) -> float:
    """Fraction of nodes whose labels disagree after the best relabeling of ``q``.

    Exact permutation search up to ``max_exact_blocks`` labels; above that the
    optimal assignment on the confusion matrix is used, which gives the same
    minimum.
    """
    a, b = _labels(p), _labels(q)
    if len(a) != len(b):
        raise ValueError("partitions must have equal length")
    n = len(a)
    if n == 0:
        return 0.0
    B = int(max(a.max(), b.max())) + 1
    C = np.zeros((B, B), dtype=np.int64)
    np.add.at(C, (a, b), 1)
    if B <= max_exact_blocks:
        cols = np.arange(B)
        best = max(C[cols, perm].sum() for perm in itertools.permutations(range(B)))
    else:
        from scipy.optimize import linear_sum_assignment
        r, c = linear_sum_assignment(-C)
        best = C[r, c].sum()
    return float(n - best) / n


def interpolate_partitions(p, q, rng) -> Partition:
    """Each node copies its block from ``p`` or ``q`` with probability 1/2."""
    a, b = _labels(p), _labels(q)
    if len(a) != len(b):
        raise ValueError("partitions must have equal length")
    pick = rng.random(len(a)) < 0.5
    B = max(getattr(p, "n_blocks", 0), getattr(q, "n_blocks", 0),
            int(max(a.max(initial=0), b.max(initial=0))) + 1)
    return Partition(np.where(pick, a, b), B)


def distance_matrix(partitions, max_vector_perms: int = 24) -> np.ndarray:
    """Pairwise :func:`partition_distance` matrix.

    For few blocks every relabeling is scored at once with one-hot products;
    otherwise pairs are handled one at a time.
    """
    labs = [_labels(p) for p in partitions]
    N = len(labs)
    if N == 0:
        return np.zeros((0, 0))
    X = np.vstack(labs)
    n = X.shape[1]
    B = int(X.max(initial=0)) + 1
    if math.factorial(B) > max_vector_perms or n == 0:
        D = np.zeros((N, N))
        for i in range(N):
            for j in range(i + 1, N):
                D[i, j] = D[j, i] = partition_distance(labs[i], labs[j])
        return D
    eye = np.eye(B)
    A = eye[X].reshape(N, n * B)
    best = np.zeros((N, N))
    for perm in itertools.permutations(range(B)):
        Q = eye[np.asarray(perm)[X]].reshape(N, n * B)
        np.maximum(best, A @ Q.T, out=best)
    D = (n - best) / n
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, D.T)


def mds_project(distances) -> np.ndarray:
    """Classical (Torgerson) MDS to two dimensions.

    Columns are flipped so each one's largest-magnitude entry is positive.
    """
    D = np.asarray(distances, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or not np.allclose(D, D.T):
        raise ValueError("distance matrix must be square and symmetric")
    n = len(D)
    J = np.eye(n) - 1.0 / n
    G = -0.5 * J @ (D ** 2) @ J
    w, V = np.linalg.eigh(G)
    top = np.argsort(w)[::-1][:2]
    X = V[:, top] * np.sqrt(np.maximum(w[top], 0.0))
    if X.shape[1] < 2:
        X = np.column_stack([X, np.zeros((n, 2 - X.shape[1]))])
    X -= X.mean(axis=0)
    for c in range(2):
        if X[np.argmax(np.abs(X[:, c])), c] < 0:
            X[:, c] *= -1
    return X


@dataclass
class LandscapeSample:
    """Partitions with their objectives, provenance and 2-D coordinates.

    ``meta[k]`` is ``(trial, sweep)`` for sampled partitions and ``(-1, -1)``
    for interpolated ones.
    """

    partitions: list
    objectives: list
    coords2d: np.ndarray | None = None
    meta: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.partitions) != len(self.objectives) or (
                self.meta and len(self.meta) != len(self.partitions)):
            raise ValueError("partitions, objectives and meta must have equal lengths")

    def rows(self) -> list[tuple]:
        """``(x, y, objective, trial, sweep)`` per point."""
        if self.coords2d is None:
            raise ValueError("project the sample first")
        return [(float(x), float(y), float(o), int(t), int(s)) for (x, y), o, (t, s)
                in zip(self.coords2d, self.objectives, self.meta)]


def sample_landscape(graph, model, traces, max_points: int = 2000, seed: int = 0,
                     project: bool = True) -> LandscapeSample:
    """Distinct partitions visited by ``traces`` plus random interpolations.

    Visited partitions are kept in first-visit order (uniformly subsampled if
    there are more than ``max_points``); the remaining budget is filled by
    interpolating uniformly random pairs of visited partitions, up to
    ``max_points`` in total.
    """
    from .models import objective

    rng = np.random.default_rng(seed)
    seen: dict[bytes, int] = {}
    parts, meta = [], []
    for t, tr in enumerate(traces):
        B = tr.final.n_blocks
        for row, step in zip(tr.partitions, tr.steps):
            key = np.asarray(row, dtype=np.int64).tobytes()
            if key not in seen:
                seen[key] = len(parts)
                parts.append(Partition(row, B))
                meta.append((t, int(step)))
    if len(parts) > max_points:
        keep = np.sort(rng.choice(len(parts), size=max_points, replace=False))
        parts = [parts[k] for k in keep]
        meta = [meta[k] for k in keep]
    visited = len(parts)
    tries = 0
    while visited > 1 and len(parts) < max_points and tries < 20 * max_points:
        tries += 1
        i, j = rng.choice(visited, size=2, replace=False)
        q = interpolate_partitions(parts[i], parts[j], rng)
        key = q.assignment.tobytes()
        if key in seen:
            continue
        seen[key] = len(parts)
        parts.append(q)
        meta.append((-1, -1))
    objs = [objective(compute_block_stats(graph, p), model) for p in parts]
    coords = mds_project(distance_matrix(parts)) if project and parts else None
    return LandscapeSample(parts, objs, coords, meta)
