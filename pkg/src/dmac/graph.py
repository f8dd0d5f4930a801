"""Network topology: oriented edge lists, incidence/Laplacian action, generators."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class NetworkGraph:
    """Undirected graph whose edge list also fixes the orientation of each edge.

    Edge ``(i, j)`` carries the input ``u_i - u_j``; it enters node ``i`` with
    sign +1 and node ``j`` with sign -1.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    neighbor_lists: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    degrees: np.ndarray = field(init=False, repr=False)
    sources: np.ndarray = field(init=False, repr=False)
    sinks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = int(self.node_count)
        if n < 1:
            raise ValueError(f"node_count must be positive, got {n}")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        seen: set[frozenset[int]] = set()
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            key = frozenset((i, j))
            if key in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add(key)
            nbrs[i].append(j)
            nbrs[j].append(i)
        isolated = [k for k in range(n) if not nbrs[k]]
        if isolated:
            raise ValueError(f"nodes without neighbours: {isolated[:10]}")

        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        src.setflags(write=False)
        dst.setflags(write=False)
        deg = np.array([len(v) for v in nbrs], dtype=np.int64)
        deg.setflags(write=False)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "neighbor_lists", tuple(tuple(sorted(v)) for v in nbrs))
        object.__setattr__(self, "degrees", deg)
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "sinks", dst)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def incidence_matrix(self) -> sp.csc_matrix:
        """Sparse ``N x E`` signed incidence matrix."""
        e = self.edge_count
        cols = np.arange(e)
        data = np.concatenate([np.ones(e), -np.ones(e)])
        rows = np.concatenate([self.sources, self.sinks])
        return sp.csc_matrix(
            (data, (rows, np.concatenate([cols, cols]))), shape=(self.node_count, e)
        )

    def laplacian_matrix(self) -> sp.csc_matrix:
        inc = self.incidence_matrix()
        return (inc @ inc.T).tocsc()

    def to_dict(self) -> dict:
        return {"n": self.node_count, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> NetworkGraph:
        return cls(int(data["n"]), tuple(tuple(e) for e in data["edges"]))


def incidence_column(g: NetworkGraph, e: int) -> np.ndarray:
    """Column ``e`` of the incidence matrix as a dense length-N vector."""
    if not 0 <= e < g.edge_count:
        raise IndexError(f"edge index {e} out of range [0, {g.edge_count})")
    col = np.zeros(g.node_count)
    i, j = g.edges[e]
    col[i] = 1.0
    col[j] = -1.0
    return col


def edge_differences(g: NetworkGraph, values: np.ndarray) -> np.ndarray:
    """``values[i] - values[j]`` for every oriented edge ``(i, j)``."""
    values = np.asarray(values, dtype=float)
    return values[g.sources] - values[g.sinks]


def laplacian_apply(g: NetworkGraph, x: np.ndarray) -> np.ndarray:
    """Return ``L x``; entry ``i`` is the sum over neighbours of ``x_i - x_j``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.node_count,):
        raise ValueError(f"expected vector of length {g.node_count}, got shape {x.shape}")
    diff = edge_differences(g, x)
    n = g.node_count
    return np.bincount(g.sources, diff, n) - np.bincount(g.sinks, diff, n)


def _prufer_to_edges(seq: list[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, v), max(leaf, v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((min(u, w), max(u, w)))
    return sorted(edges)


def generate_tree(n: int, seed: int | np.random.Generator = 0) -> NetworkGraph:
    """Uniformly random labelled tree on ``n`` nodes (random Pruefer sequence)."""
    if n < 2:
        raise ValueError(f"a tree needs at least 2 nodes, got {n}")
    rng = np.random.default_rng(seed)
    seq = rng.integers(0, n, size=n - 2).tolist()
    return NetworkGraph(n, tuple(_prufer_to_edges(seq, n)))


def generate_line(n: int) -> NetworkGraph:
    if n < 2:
        raise ValueError(f"a line needs at least 2 nodes, got {n}")
    return NetworkGraph(n, tuple((k, k + 1) for k in range(n - 1)))


def generate_star(n: int) -> NetworkGraph:
    if n < 2:
        raise ValueError(f"a star needs at least 2 nodes, got {n}")
    return NetworkGraph(n, tuple((0, k) for k in range(1, n)))
