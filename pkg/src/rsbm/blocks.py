"""Partitions and the block sufficient statistics used by every objective."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graph import Multigraph


@dataclass(frozen=True, eq=False)
class Partition:
    """Block assignment ``g_i`` for each node; blocks may be empty."""

    assignment: np.ndarray
    n_blocks: int

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64).ravel()
        B = int(self.n_blocks)
        if a.size and (a.min() < 0 or a.max() >= B):
            raise ValueError(f"block ids must lie in [0, {B})")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "n_blocks", B)

    @classmethod
    def from_labels(cls, labels, n_blocks: int | None = None) -> "Partition":
        a = np.asarray(labels, dtype=np.int64)
        return cls(a, n_blocks if n_blocks is not None else (int(a.max()) + 1 if a.size else 1))

    @classmethod
    def random(cls, n: int, n_blocks: int, rng) -> "Partition":
        return cls(rng.integers(n_blocks, size=n), n_blocks)

    def __len__(self):
        return len(self.assignment)

    def __eq__(self, other):
        return (isinstance(other, Partition) and self.n_blocks == other.n_blocks
                and np.array_equal(self.assignment, other.assignment))

    def moved(self, node: int, block: int) -> "Partition":
        a = self.assignment.copy()
        a[node] = block
        return Partition(a, self.n_blocks)

    # serialization: JSON array of ints, or "node block" lines
    def to_json(self) -> str:
        return json.dumps(self.assignment.tolist())

    @classmethod
    def from_json(cls, text: str, n_blocks: int | None = None) -> "Partition":
        return cls.from_labels(json.loads(text), n_blocks)

    def to_text(self, labels=None) -> str:
        lab = labels or [str(i) for i in range(len(self))]
        return "".join(f"{l} {b}\n" for l, b in zip(lab, self.assignment.tolist()))

    @classmethod
    def from_text(cls, text: str, labels=None, n_blocks: int | None = None) -> "Partition":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if labels is None:
            blocks = [int(b) for _, b in rows]
        else:
            lookup = {a: int(b) for a, b in rows}
            missing = [l for l in labels if l not in lookup]
            if missing:
                raise ValueError(f"partition has no entry for node {missing[0]!r}")
            blocks = [lookup[l] for l in labels]
        return cls.from_labels(blocks, n_blocks)


def read_partition(path, graph: Multigraph | None = None, n_blocks: int | None = None) -> Partition:
    """Read a JSON array or a two-column ``node block`` file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return Partition.from_json(text, n_blocks)
    labels = graph.labels if graph is not None else None
    return Partition.from_text(text, labels, n_blocks)


@dataclass(eq=False)
class BlockStats:
    """Sufficient statistics of a partition of a multigraph.

    ``M[r, s]`` counts edges between blocks ``r != s`` and twice the internal
    edges for ``r == s`` (self-loops add 2). ``kplus[i]`` counts edge ends of
    ``i`` landing in its own block. Arrays are mutated in place by
    :func:`apply_move`.
    """

    assignment: np.ndarray
    M: np.ndarray
    kappa: np.ndarray
    sizes: np.ndarray
    kplus: np.ndarray
    degree: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.M.shape[0]

    @property
    def two_m(self) -> int:
        return int(self.degree.sum())

    @property
    def kminus(self) -> np.ndarray:
        return self.degree - self.kplus

    @property
    def kappa_plus(self) -> np.ndarray:
        return np.bincount(self.assignment, weights=self.kplus, minlength=self.n_blocks).astype(np.int64)

    @property
    def kappa_minus(self) -> np.ndarray:
        return self.kappa - self.kappa_plus

    @property
    def partition(self) -> Partition:
        return Partition(self.assignment.copy(), self.n_blocks)

    def copy(self) -> "BlockStats":
        return BlockStats(*(getattr(self, f).copy() for f in
                            ("assignment", "M", "kappa", "sizes", "kplus")), self.degree)

    def equals(self, other: "BlockStats") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in
                   ("assignment", "M", "kappa", "sizes", "kplus", "degree"))


def compute_block_stats(g: Multigraph, p: Partition) -> BlockStats:
    if len(p) != g.node_count:
        raise ValueError(f"partition has {len(p)} entries for {g.node_count} nodes")
    B = p.n_blocks
    a = p.assignment.copy()
    rows = np.repeat(np.arange(g.node_count), np.diff(g.indptr))
    br, bc = a[rows], a[g.indices]
    M = np.zeros((B, B), dtype=np.int64)
    np.add.at(M, (br, bc), g.weights)
    same = br == bc
    kplus = np.bincount(rows[same], weights=g.weights[same], minlength=g.node_count).astype(np.int64)
    kappa = np.bincount(a, weights=g.degree, minlength=B).astype(np.int64)
    sizes = np.bincount(a, minlength=B).astype(np.int64)
    return BlockStats(a, M, kappa, sizes, kplus, g.degree)


def apply_move(stats: BlockStats, node: int, to_block: int, g: Multigraph) -> BlockStats:
    """Move ``node`` to ``to_block`` in O(degree) time; mutates and returns ``stats``."""
    if not 0 <= to_block < stats.n_blocks:
        raise ValueError(f"block {to_block} out of range")
    B = stats.n_blocks
    z = np.zeros(g.node_count)
    K.move_node(node, to_block, g.indptr, g.indices, g.weights, stats.assignment, stats.M,
                stats.kappa, stats.sizes, stats.kplus, z, z, np.zeros(B), np.zeros(B),
                np.zeros(B, np.int64), np.zeros(B, np.int64), z)
    return stats
