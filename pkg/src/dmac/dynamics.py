"""Uncertain networked plant: candidate sets, validation and state stepping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dmac.graph import NetworkGraph, laplacian_apply

DEFAULT_SEPARATION = 0.05
_MAX_RESAMPLES = 1000


class AdmissibilityError(ValueError):
    """The edge gain ``b`` is too large for some node degree."""


@dataclass(frozen=True)
class CandidateSet:
    """Finite set of possible local dynamics parameters for one node."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("candidate set must be non-empty")
        if len(set(vals)) != len(vals):
            raise ValueError(f"candidate values must be distinct: {vals}")
        if list(vals) != sorted(vals):
            raise ValueError(f"candidate values must be sorted ascending: {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def lower(self) -> float:
        return self.values[0]

    @property
    def upper(self) -> float:
        return self.values[-1]


@dataclass(frozen=True, eq=False)
class UncertainNetwork:
    graph: NetworkGraph
    b: float
    candidates: tuple[CandidateSet, ...]
    true_index: np.ndarray
    # (N, M_max) candidate table, NaN-padded when set sizes differ
    candidate_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cands = tuple(c if isinstance(c, CandidateSet) else CandidateSet(tuple(c)) for c in self.candidates)
        if len(cands) != self.graph.node_count:
            raise ValueError(f"need {self.graph.node_count} candidate sets, got {len(cands)}")
        idx = np.asarray(self.true_index, dtype=np.int64).reshape(-1)
        if idx.shape != (self.graph.node_count,):
            raise ValueError("true_index must have one entry per node")
        sizes = np.array([len(c) for c in cands])
        if np.any(idx < 0) or np.any(idx >= sizes):
            raise ValueError("true_index out of range for some candidate set")
        table = np.full((len(cands), int(sizes.max())), np.nan)
        for k, c in enumerate(cands):
            table[k, : len(c)] = c.values
        idx.setflags(write=False)
        table.setflags(write=False)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "true_index", idx)
        object.__setattr__(self, "candidate_table", table)

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def true_a(self) -> np.ndarray:
        return self.candidate_table[np.arange(self.n), self.true_index]

    @property
    def node_upper(self) -> np.ndarray:
        return np.array([c.upper for c in self.candidates])

    @property
    def node_lower(self) -> np.ndarray:
        return np.array([c.lower for c in self.candidates])

    @property
    def a_bar(self) -> float:
        return float(self.node_upper.max())

    @property
    def a_lower(self) -> float:
        return float(self.node_lower.min())

    def with_true_index(self, true_index) -> UncertainNetwork:
        return UncertainNetwork(self.graph, self.b, self.candidates, np.asarray(true_index))

    def to_dict(self) -> dict:
        out = self.graph.to_dict()
        out["b"] = self.b
        out["candidates"] = [list(c.values) for c in self.candidates]
        out["true_index"] = self.true_index.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> UncertainNetwork:
        graph = NetworkGraph.from_dict(data)
        cands = tuple(CandidateSet(tuple(v)) for v in data["candidates"])
        return cls(graph, float(data["b"]), cands, np.asarray(data["true_index"]))


@dataclass(frozen=True)
class NetworkState:
    x: np.ndarray
    t: int = 0


@dataclass(frozen=True)
class Violation:
    node: int | None
    value: float
    condition: str
    message: str


def max_edge_gain(d: int) -> float:
    """Supremum of admissible ``b`` for degree ``d``."""
    return math.sqrt(1.0 / (8.0 * d))


def admissible_interval(b: float, d: int) -> tuple[float, float]:
    """Open interval of ``a`` with ``a**2 + 2 b**2 d < a``."""
    if b <= 0 or d < 1:
        raise ValueError(f"need b > 0 and d >= 1, got b={b}, d={d}")
    disc = 0.25 - 2.0 * b * b * d
    if disc <= 0:
        raise AdmissibilityError(
            f"b={b} violates b < sqrt(1/(8 d)) = {max_edge_gain(d):.6g} for degree {d}"
        )
    r = math.sqrt(disc)
    return 0.5 - r, 0.5 + r


def is_admissible(a: float, b: float, d: int) -> bool:
    return a * a + 2.0 * b * b * d < a


def validate_network(net: UncertainNetwork) -> list[Violation]:
    """Every failed admissibility inequality, one record each. Empty means valid."""
    out: list[Violation] = []
    b = net.b
    dmax = net.graph.max_degree
    if not b < max_edge_gain(dmax):
        out.append(
            Violation(
                None,
                b,
                "edge_gain",
                f"b={b} must satisfy b < sqrt(1/(8*d_max)) = {max_edge_gain(dmax):.6g} (d_max={dmax})",
            )
        )
    for i, (cands, d) in enumerate(zip(net.candidates, net.graph.degrees)):
        d = int(d)
        for a in cands.values:
            if not 0.0 < a < 1.0:
                out.append(Violation(i, a, "unit_interval", f"node {i}: a={a} not in (0, 1)"))
            if not is_admissible(a, b, d):
                out.append(
                    Violation(
                        i,
                        a,
                        "local_admissibility",
                        f"node {i}: a^2 + 2 b^2 d = {a * a + 2 * b * b * d:.6g} >= a = {a} (d={d})",
                    )
                )
    return out


def sample_candidates(
    b: float,
    d: int,
    m: int,
    seed: int | np.random.Generator = 0,
    separation: float = DEFAULT_SEPARATION,
) -> CandidateSet:
    """Draw ``m`` admissible parameters uniformly with pairwise gaps >= ``separation``."""
    lo, hi = admissible_interval(b, d)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > 1 and (m - 1) * separation >= hi - lo:
        raise ValueError(f"{m} values with separation {separation} do not fit in ({lo:.4g}, {hi:.4g})")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_RESAMPLES):
        vals = np.sort(rng.uniform(lo, hi, size=m))
        if m > 1 and np.min(np.diff(vals)) < separation:
            continue
        if all(lo < v < hi and is_admissible(v, b, d) for v in vals):
            return CandidateSet(tuple(vals.tolist()))
    raise RuntimeError(
        f"could not draw {m} values with separation {separation} after {_MAX_RESAMPLES} tries"
    )


def build_network(
    graph: NetworkGraph,
    b: float,
    m: int,
    seed: int | np.random.Generator = 0,
    separation: float = DEFAULT_SEPARATION,
    true_index=None,
) -> UncertainNetwork:
    """Sample candidate sets for every node from one seeded stream.

    ``true_index`` may be an int (same index everywhere), a per-node sequence,
    or None for a seeded uniform draw.
    """
    rng = np.random.default_rng(seed)
    cands = tuple(
        sample_candidates(b, int(d), m, rng, separation) for d in graph.degrees
    )
    if true_index is None:
        idx = rng.integers(0, m, size=graph.node_count)
    elif np.isscalar(true_index):
        idx = np.full(graph.node_count, int(true_index))
    else:
        idx = np.asarray(true_index)
    return UncertainNetwork(graph, b, cands, idx)


def step_node(a: float, x_i: float, edge_diff_sum: float, w_i: float, b: float = 1.0) -> float:
    """One node update ``a x_i + b sum_j (u_i - u_j) + w_i``."""
    return a * x_i + b * edge_diff_sum + w_i


def step_network(net: UncertainNetwork, x: np.ndarray, node_controls: np.ndarray, w: np.ndarray, a=None) -> np.ndarray:
    """Vectorised per-node update; ``a`` defaults to the true parameters."""
    a = net.true_a if a is None else np.asarray(a, dtype=float)
    return a * x + net.b * laplacian_apply(net.graph, node_controls) + w


def step_network_distributed(
    net: UncertainNetwork, x: np.ndarray, node_controls: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """Node-by-node update reading only each node's neighbour list."""
    a = net.true_a
    out = np.empty(net.n)
    for i, nbrs in enumerate(net.graph.neighbor_lists):
        diff_sum = sum(node_controls[i] - node_controls[j] for j in nbrs)
        out[i] = step_node(a[i], x[i], diff_sum, w[i], net.b)
    return out


def step_network_compact(net: UncertainNetwork, x: np.ndarray, u_edges: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Centralised form ``A x + B u + w`` with ``B = b * incidence``."""
    x = np.asarray(x, dtype=float)
    u_edges = np.asarray(u_edges, dtype=float)
    w = np.asarray(w, dtype=float)
    n, e = net.n, net.graph.edge_count
    if x.shape != (n,) or w.shape != (n,) or u_edges.shape != (e,):
        raise ValueError(f"expected x, w of length {n} and u of length {e}")
    inc = net.graph.incidence_matrix()
    return net.true_a * x + net.b * (inc @ u_edges) + w


def infer_disturbance(a: float, x_t: float, edge_diff_sum: float, x_next: float, b: float = 1.0):
    """Disturbance consistent with the transition ``x_t -> x_next`` under model ``a``.

    Signed so that the true parameter returns the applied ``w``; under a wrong
    parameter ``a'`` the result is ``w - (a' - a_true) x_t``.
    """
    return x_next - a * x_t - b * edge_diff_sum
