"""Zero, distributed H-infinity and distributed minimax adaptive control laws."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dmac.dynamics import CandidateSet, UncertainNetwork
from dmac.graph import NetworkGraph, edge_differences

# absolute slack under which two model costs count as tied
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ControlDecision:
    node_controls: np.ndarray
    edge_inputs: np.ndarray


def _decision(graph: NetworkGraph, node_controls: np.ndarray) -> ControlDecision:
    return ControlDecision(node_controls, edge_differences(graph, node_controls))


def certainty_equivalent_controls(x: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Node controls ``b x_i / (a_i - 1)``; the H-infinity law for parameters ``a``."""
    return b * np.asarray(x, dtype=float) / (np.asarray(a, dtype=float) - 1.0)


def zero_policy(graph: NetworkGraph, x: np.ndarray) -> ControlDecision:
    return _decision(graph, np.zeros(graph.node_count))


def hinf_policy(graph: NetworkGraph, x: np.ndarray, a_true: np.ndarray, b: float) -> ControlDecision:
    """Optimal distributed H-infinity state feedback ``K = B^T (A - I)^{-1}`` for known ``a``."""
    return _decision(graph, certainty_equivalent_controls(x, a_true, b))


def minimax_policy(
    graph: NetworkGraph,
    x: np.ndarray,
    selected: np.ndarray,
    candidate_table: np.ndarray,
    b: float,
) -> ControlDecision:
    """Certainty-equivalent H-infinity law using each node's selected model."""
    selected = np.asarray(selected, dtype=np.int64)
    a_sel = candidate_table[np.arange(graph.node_count), selected]
    return _decision(graph, certainty_equivalent_controls(x, a_sel, b))


# ---------------------------------------------------------------------------
# per-node minimax state


@dataclass(frozen=True, eq=False)
class MinimaxNodeState:
    """Accumulated data covariance of one node, over ``[-x_next, x, u_{N_i}]``."""

    node_id: int
    z: np.ndarray
    selected_index: int = 0

    @classmethod
    def initial(cls, node_id: int, degree: int) -> MinimaxNodeState:
        return cls(node_id, np.zeros((degree + 2, degree + 2)), 0)

    @property
    def degree(self) -> int:
        return self.z.shape[0] - 2


def model_vector(a: float, b: float, degree: int) -> np.ndarray:
    return np.concatenate([[1.0, a], np.full(degree, b)])


def quadform(z: np.ndarray, a: float, b: float) -> float:
    """Full quadratic form of ``z`` along ``[1, a, b 1^T]``."""
    v = model_vector(a, b, z.shape[0] - 2)
    return float(v @ z @ v)


def quadratic_coefficients(z: np.ndarray, b: float) -> tuple[float, float, float]:
    """``(c0, c1, c2)`` with ``quadform(z, a, b) == c0 + c1 a + c2 a**2``."""
    s = model_vector(0.0, b, z.shape[0] - 2)
    zs = z @ s
    return float(s @ zs), float(2.0 * zs[1]), float(z[1, 1])


def disturbance_energy(z: np.ndarray, values, b: float) -> np.ndarray:
    """Inferred disturbance energy for each candidate parameter."""
    c0, c1, c2 = quadratic_coefficients(z, b)
    a = np.asarray(values, dtype=float)
    return c0 + c1 * a + c2 * a * a


def minimax_update(
    state: MinimaxNodeState, x_next: float, x_t: float, u_neighbors
) -> MinimaxNodeState:
    """Add the rank-one contribution of the transition ``x_t -> x_next``.

    ``u_neighbors[k]`` is ``u_i - u_{j_k}`` for the node's sorted neighbour list.
    """
    u_neighbors = np.atleast_1d(np.asarray(u_neighbors, dtype=float))
    if u_neighbors.shape != (state.degree,):
        raise ValueError(f"node {state.node_id}: expected {state.degree} neighbour inputs, got {u_neighbors.shape}")
    v = np.concatenate([[-x_next, x_t], u_neighbors])
    return MinimaxNodeState(state.node_id, state.z + np.outer(v, v), state.selected_index)


def _select_rows(q: np.ndarray, prev: np.ndarray) -> np.ndarray:
    # q: (N, M) with +inf padding; keep prev on ties, else lowest near-minimal index
    qmin = q.min(axis=1, keepdims=True)
    near = q <= qmin + TIE_TOL
    rows = np.arange(q.shape[0])
    return np.where(near[rows, prev], prev, np.argmax(near, axis=1))


def minimax_select(state: MinimaxNodeState, candidates: CandidateSet, b: float) -> int:
    """Index of the candidate that explains the observed data with least disturbance energy."""
    if len(candidates) == 0:
        raise ValueError("empty candidate set")
    q = disturbance_energy(state.z, candidates.values, b)
    prev = np.array([min(state.selected_index, len(candidates) - 1)])
    return int(_select_rows(q[None, :], prev)[0])


def neighbor_inputs(graph: NetworkGraph, node: int, node_controls: np.ndarray) -> np.ndarray:
    return np.array([node_controls[node] - node_controls[j] for j in graph.neighbor_lists[node]])


# ---------------------------------------------------------------------------
# network-wide bank


@dataclass(eq=False)
class _DegreeGroup:
    nodes: np.ndarray
    neighbors: np.ndarray  # (n_d, d), sorted per row
    z: np.ndarray  # (n_d, d + 2, d + 2)


@dataclass(eq=False)
class MinimaxBank:
    """All node states of a network, grouped by degree for vectorised updates.

    Each node only ever reads its own and its neighbours' data; grouping is a
    storage layout and does not couple nodes.
    """

    net: UncertainNetwork
    selected: np.ndarray = field(init=False)
    _groups: list[_DegreeGroup] = field(init=False, repr=False)
    _slot: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        g = self.net.graph
        self.selected = np.zeros(g.node_count, dtype=np.int64)
        self._groups = []
        self._slot = np.empty((g.node_count, 2), dtype=np.int64)
        for d in np.unique(g.degrees):
            nodes = np.flatnonzero(g.degrees == d)
            nbrs = np.array([g.neighbor_lists[i] for i in nodes], dtype=np.int64).reshape(len(nodes), d)
            self._slot[nodes, 0] = len(self._groups)
            self._slot[nodes, 1] = np.arange(len(nodes))
            self._groups.append(_DegreeGroup(nodes, nbrs, np.zeros((len(nodes), d + 2, d + 2))))

    def update(self, x_t: np.ndarray, x_next: np.ndarray, node_controls: np.ndarray) -> None:
        for grp in self._groups:
            idx = grp.nodes
            u_nb = node_controls[idx, None] - node_controls[grp.neighbors]
            v = np.concatenate([-x_next[idx, None], x_t[idx, None], u_nb], axis=1)
            grp.z += v[:, :, None] * v[:, None, :]

    def coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.net.n
        c0, c1, c2 = np.empty(n), np.empty(n), np.empty(n)
        b = self.net.b
        for grp in self._groups:
            d = grp.neighbors.shape[1]
            s = model_vector(0.0, b, d)
            zs = grp.z @ s
            c0[grp.nodes] = zs @ s
            c1[grp.nodes] = 2.0 * zs[:, 1]
            c2[grp.nodes] = grp.z[:, 1, 1]
        return c0, c1, c2

    def energies(self) -> np.ndarray:
        """``(N, M)`` disturbance energy per candidate; +inf on padding."""
        c0, c1, c2 = self.coefficients()
        a = self.net.candidate_table
        q = c0[:, None] + c1[:, None] * a + c2[:, None] * a * a
        return np.where(np.isnan(a), np.inf, q)

    def select(self) -> np.ndarray:
        self.selected = _select_rows(self.energies(), self.selected)
        return self.selected

    def node_state(self, node: int) -> MinimaxNodeState:
        gi, k = self._slot[node]
        return MinimaxNodeState(int(node), self._groups[gi].z[k].copy(), int(self.selected[node]))
