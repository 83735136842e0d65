"""Undirected multigraphs with self-loops, edge-list I/O and bundled datasets.

Adjacency follows the block-model convention: ``A[i, j]`` counts the edges
between ``i`` and ``j`` and ``A[i, i]`` is twice the number of self-loops at
``i``, so that ``degree(i) == A[i].sum()`` and ``degree.sum() == 2 * m``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class EdgeListError(ValueError):
    """Raised for a malformed edge-list document."""


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Immutable undirected multigraph.

    Nodes are dense integers ``0..node_count-1``. ``edges`` is an ``(m, 2)``
    integer array, one row per edge (repeated rows are multi-edges, ``(u, u)``
    rows are self-loops). A CSR view of the adjacency counts is built once at
    construction; self-loops appear as a single entry ``(i, i)`` of weight
    ``A_ii``.
    """

    node_count: int
    edges: np.ndarray
    labels: tuple[str, ...] | None = None
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.node_count)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValueError("edge endpoint out of range")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels must have one entry per node")
        # canonical orientation so equal multisets give equal arrays
        edges = np.sort(edges, axis=1)
        edges.setflags(write=False)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "edges", edges)

        u, v = edges[:, 0], edges[:, 1]
        loop = u == v
        src = np.concatenate([u[~loop], v[~loop], u[loop]])
        dst = np.concatenate([v[~loop], u[~loop], u[loop]])
        w = np.concatenate([np.ones(2 * (~loop).sum(), np.int64), np.full(loop.sum(), 2, np.int64)])
        # aggregate parallel entries into one CSR slot per neighbor
        key = src * max(n, 1) + dst
        uniq, inv = np.unique(key, return_inverse=True)
        agg = np.bincount(inv, weights=w, minlength=len(uniq)).astype(np.int64)
        rows, cols = uniq // max(n, 1), uniq % max(n, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        degree = np.bincount(rows, weights=agg, minlength=n).astype(np.int64)
        for name, arr in (("indptr", indptr), ("indices", cols.astype(np.int64)),
                          ("weights", agg), ("degree", degree)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        """Total number of edges (self-loops count once)."""
        return len(self.edges)

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(neighbor ids, adjacency counts)`` of node ``i``."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def adjacency_count(self, i: int, j: int) -> int:
        nbrs, w = self.neighbors(i)
        hit = np.flatnonzero(nbrs == j)
        return int(w[hit[0]]) if len(hit) else 0

    def adjacency_matrix(self) -> np.ndarray:
        """Dense ``A`` (fine for the small graphs used in tests)."""
        A = np.zeros((self.node_count, self.node_count), dtype=np.int64)
        rows = np.repeat(np.arange(self.node_count), np.diff(self.indptr))
        A[rows, self.indices] = self.weights
        return A

    def simple(self) -> "Multigraph":
        """Collapse multi-edges and drop self-loops."""
        e = self.edges[self.edges[:, 0] != self.edges[:, 1]]
        e = np.unique(e, axis=0) if len(e) else e
        return Multigraph(self.node_count, e, self.labels)

    def edge_multiset(self) -> list[tuple[int, int]]:
        return sorted(map(tuple, self.edges.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Multigraph):
            return NotImplemented
        return self.node_count == other.node_count and self.edge_multiset() == other.edge_multiset()

    def __repr__(self):
        return f"Multigraph(node_count={self.node_count}, m={self.m})"


def from_edges(pairs: Iterable[Sequence[int]], node_count: int | None = None) -> Multigraph:
    e = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    n = int(e.max()) + 1 if node_count is None and e.size else (node_count or 0)
    return Multigraph(n, e)


def from_adjacency(A) -> Multigraph:
    """Build a multigraph from a symmetric count matrix with even diagonal."""
    A = np.asarray(A, dtype=np.int64)
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency must be symmetric")
    if np.any(np.diag(A) % 2):
        raise ValueError("diagonal entries must be even (A_ii = 2 x self-loops)")
    iu, ju = np.triu_indices(len(A), k=1)
    cnt = A[iu, ju]
    pairs = [np.repeat(iu, cnt), np.repeat(ju, cnt)]
    loops = np.repeat(np.arange(len(A)), np.diag(A) // 2)
    e = np.column_stack([np.concatenate([pairs[0], loops]), np.concatenate([pairs[1], loops])])
    return Multigraph(len(A), e)


def load_edge_list(text: str, simple: bool = False) -> Multigraph:
    """Parse an edge-list document.

    One edge per line as two whitespace-separated labels; blank lines and
    lines starting with ``#`` are skipped. Labels become dense ids in order
    of first appearance. Repeated lines are multi-edges unless ``simple``.
    """
    ids: dict[str, int] = {}
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) != 2:
            raise EdgeListError(f"line {lineno}: expected 2 tokens, got {len(tok)}")
        edges.append([ids.setdefault(t, len(ids)) for t in tok])
    g = Multigraph(len(ids), np.asarray(edges, dtype=np.int64).reshape(-1, 2), tuple(ids))
    return g.simple() if simple else g


def save_edge_list(g: Multigraph) -> str:
    lab = g.labels or tuple(str(i) for i in range(g.node_count))
    lines = [f"{lab[u]} {lab[v]}" for u, v in g.edges.tolist()]
    return "\n".join(lines) + ("\n" if lines else "")


def read_edge_list(path, simple: bool = False) -> Multigraph:
    return load_edge_list(Path(path).read_text(encoding="utf-8"), simple=simple)


def write_edge_list(g: Multigraph, path) -> None:
    """Write the edge list plus a ``<path>.labels.json`` id->label sidecar."""
    path = Path(path)
    path.write_text(save_edge_list(g), encoding="utf-8", newline="\n")
    if g.labels is not None:
        Path(str(path) + ".labels.json").write_text(json.dumps(list(g.labels)), encoding="utf-8")


def twin_stars() -> Multigraph:
    """Two 4-leaf stars whose hubs (nodes 0 and 1) share an edge; leaves 2-5 hang
    off hub 0, leaves 6-9 off hub 1."""
    e = [(0, 1)] + [(0, i) for i in range(2, 6)] + [(1, i) for i in range(6, 10)]
    return Multigraph(10, np.array(e))


# twin-stars partitions in the order core-periphery, twisted, assortative
TWIN_STARS_PARTITIONS = {
    "core-periphery": [0, 0] + [1] * 8,
    "twisted": [0, 1] + [1] * 4 + [0] * 4,
    "assortative": [0, 1] + [0] * 4 + [1] * 4,
}


def sparsify(g: Multigraph, remove_count: int, seed: int) -> Multigraph:
    """Delete ``remove_count`` uniformly chosen edges, then drop nodes left
    isolated and re-densify ids (labels follow their nodes)."""
    if not 0 <= remove_count <= g.m:
        raise ValueError(f"remove_count must be in [0, {g.m}], got {remove_count}")
    rng = np.random.default_rng(seed)
    drop = rng.choice(g.m, size=remove_count, replace=False)
    keep = np.ones(g.m, dtype=bool)
    keep[drop] = False
    e = g.edges[keep]
    alive = np.zeros(g.node_count, dtype=bool)
    alive[e.ravel()] = True
    if remove_count == 0:
        alive[:] = True
    new_id = np.cumsum(alive) - 1
    labels = None if g.labels is None else tuple(l for l, a in zip(g.labels, alive) if a)
    return Multigraph(int(alive.sum()), new_id[e], labels)


# ---------------------------------------------------------------- datasets

DATASETS = {
    # name: (file, block count)
    "karate": ("karate.txt", 2),
    "dolphins": ("dolphins.txt", 2),
    "lesmis": ("lesmis.txt", 6),
}

DATA_ENV = "RSBM_DATA_DIR"


def _dataset_path(filename: str) -> Path:
    extra = os.environ.get(DATA_ENV)
    if extra and (Path(extra) / filename).exists():
        return Path(extra) / filename
    p = Path(str(resources.files("rsbm") / "data" / filename))
    if not p.exists():
        raise FileNotFoundError(
            f"dataset file {filename!r} is not bundled; place it in ${DATA_ENV}"
        )
    return p


def load_dataset(name: str) -> Multigraph:
    """Load a bundled real network as a simple graph."""
    if name not in DATASETS:
        raise KeyError(f"unknown dataset {name!r}; choose from {sorted(DATASETS)}")
    return read_edge_list(_dataset_path(DATASETS[name][0]), simple=True)


def dataset_blocks(name: str) -> int:
    return DATASETS[name][1]


def karate_groundtruth(g: Multigraph | None = None, kind: str = "faction") -> np.ndarray:
    """Karate split labels (0 = instructor, 1 = administrator) aligned to ``g``'s ids.

    ``kind='faction'`` uses factional alignment; ``kind='club'`` the club each
    member joined. They differ only in member 9.
    """
    if kind not in ("faction", "club"):
        raise ValueError("kind must be 'faction' or 'club'")
    g = g if g is not None else load_dataset("karate")
    rows = [ln.split() for ln in _dataset_path(f"karate.{kind}.txt").read_text().splitlines()
            if ln.strip() and not ln.startswith("#")]
    lab = {a: int(b) for a, b in rows}
    return np.array([lab[l] for l in g.labels], dtype=np.int64)
