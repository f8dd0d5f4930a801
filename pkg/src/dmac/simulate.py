"""Closed-loop harness: traces, game cost, empirical gains, paired comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dmac.controllers import MinimaxBank, hinf_policy, minimax_policy, zero_policy
from dmac.disturbances import DisturbanceSpec, draw
from dmac.dynamics import UncertainNetwork, step_network, validate_network
from dmac.graph import edge_differences

CONTROLLERS = ("minimax", "hinf", "zero")

# selections changing inside this trailing fraction of the horizon void convergence
CONVERGENCE_TAIL = 0.1


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    controller_kind: str
    states: np.ndarray  # (T + 1, N)
    node_controls: np.ndarray  # (T, N)
    edge_inputs: np.ndarray  # (T, E)
    disturbances: np.ndarray  # (T, N)
    selections: np.ndarray | None = None  # (T, N), minimax only

    @property
    def horizon(self) -> int:
        return self.node_controls.shape[0]


@dataclass(frozen=True, eq=False)
class RunMetrics:
    per_node_cost: np.ndarray
    total_cost: float
    empirical_gain: float
    convergence_time: int | None
    switch_count: np.ndarray
    gamma_eval: float
    state_energy: float
    control_energy: float
    edge_input_energy: float
    disturbance_energy: float
    nonzero_initial_state: bool

    def to_record(self, per_node: bool = True) -> dict:
        rec = {
            "total_cost": self.total_cost,
            "empirical_gain": self.empirical_gain,
            "convergence_time": self.convergence_time,
            "gamma_eval": self.gamma_eval,
            "state_energy": self.state_energy,
            "control_energy": self.control_energy,
            "edge_input_energy": self.edge_input_energy,
            "disturbance_energy": self.disturbance_energy,
            "nonzero_initial_state": self.nonzero_initial_state,
            "total_switches": int(self.switch_count.sum()),
        }
        if per_node:
            rec["per_node_cost"] = self.per_node_cost.tolist()
            rec["switch_count"] = self.switch_count.tolist()
        return rec


def convergence_time(selections: np.ndarray, true_index: np.ndarray) -> int | None:
    """First step after which every node keeps its true model until the horizon."""
    horizon = selections.shape[0]
    correct = np.all(selections == np.asarray(true_index)[None, :], axis=1)
    if not correct[-1]:
        return None
    wrong = np.flatnonzero(~correct)
    t_c = 0 if wrong.size == 0 else int(wrong[-1]) + 1
    if t_c > 0 and t_c >= horizon - math.ceil(CONVERGENCE_TAIL * horizon):
        return None
    return t_c


def compute_metrics(trace: SimulationTrace, net: UncertainNetwork, gamma_eval: float) -> RunMetrics:
    x2 = trace.states**2
    u2 = trace.node_controls**2
    w2 = trace.disturbances**2
    per_node = x2.sum(axis=0) + u2.sum(axis=0) - gamma_eval**2 * w2.sum(axis=0)
    dist = float(w2.sum())
    out = float(x2.sum() + u2.sum())
    gain = math.sqrt(out / dist) if dist > 0 else (0.0 if out == 0 else math.inf)
    if trace.selections is not None:
        switches = np.count_nonzero(np.diff(trace.selections, axis=0), axis=0)
        t_conv = convergence_time(trace.selections, net.true_index)
    else:
        switches = np.zeros(net.n, dtype=np.int64)
        t_conv = None
    return RunMetrics(
        per_node_cost=per_node,
        total_cost=float(per_node.sum()),
        empirical_gain=gain,
        convergence_time=t_conv,
        switch_count=switches,
        gamma_eval=float(gamma_eval),
        state_energy=float(x2.sum()),
        control_energy=float(u2.sum()),
        edge_input_energy=float((trace.edge_inputs**2).sum()),
        disturbance_energy=dist,
        nonzero_initial_state=bool(np.any(trace.states[0] != 0)),
    )


def run(
    net: UncertainNetwork,
    controller_kind: str,
    disturbance: DisturbanceSpec,
    T: int,
    gamma_eval: float = 0.0,
    x0: np.ndarray | None = None,
    validate: bool = True,
) -> tuple[SimulationTrace, RunMetrics]:
    """Simulate one controller for ``T`` steps.

    Each step: fold the transition into ``x(t)`` into the minimax statistics,
    select models, act on ``x(t)``, draw ``w(t)``, advance the plant.
    """
    if controller_kind not in CONTROLLERS:
        raise ValueError(f"unknown controller {controller_kind!r}; expected one of {CONTROLLERS}")
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    if validate:
        problems = validate_network(net)
        if problems:
            raise ValueError(f"invalid network ({len(problems)} violations): {problems[0].message}")
    g = net.graph
    n = net.n
    states = np.zeros((T + 1, n))
    if x0 is not None:
        states[0] = np.asarray(x0, dtype=float)
    controls = np.zeros((T, n))
    edges = np.zeros((T, g.edge_count))
    dists = np.zeros((T, n))
    selections = np.zeros((T, n), dtype=np.int64) if controller_kind == "minimax" else None
    bank = MinimaxBank(net) if controller_kind == "minimax" else None
    a_true = net.true_a

    for t in range(T):
        x = states[t]
        if bank is not None:
            if t > 0:
                bank.update(states[t - 1], x, controls[t - 1])
            sel = bank.select()
            selections[t] = sel
            dec = minimax_policy(g, x, sel, net.candidate_table, net.b)
        elif controller_kind == "hinf":
            dec = hinf_policy(g, x, a_true, net.b)
        else:
            dec = zero_policy(g, x)
        controls[t] = dec.node_controls
        edges[t] = dec.edge_inputs
        dists[t] = draw(disturbance, t, x, net)
        states[t + 1] = step_network(net, x, dec.node_controls, dists[t])

    trace = SimulationTrace(controller_kind, states, controls, edges, dists, selections)
    return trace, compute_metrics(trace, net, gamma_eval)


@dataclass(frozen=True, eq=False)
class Comparison:
    traces: dict[str, SimulationTrace]
    metrics: dict[str, RunMetrics]
    state_diff_l1: np.ndarray  # (T + 1,) ||x_minimax - x_hinf||_1
    control_diff_l1: np.ndarray  # (T,) ||u_minimax - u_hinf||_1 over edge inputs
    hindsight_control_diff_l1: np.ndarray  # (T,) minimax inputs vs H-inf law on the same states
    first_node_state_diff: np.ndarray = field(repr=False)
    first_edge_control_diff: np.ndarray = field(repr=False)

    def series(self) -> dict[str, np.ndarray]:
        return {
            "state_diff_l1": self.state_diff_l1,
            "control_diff_l1": self.control_diff_l1,
            "hindsight_control_diff_l1": self.hindsight_control_diff_l1,
            "first_node_state_diff": self.first_node_state_diff,
            "first_edge_control_diff": self.first_edge_control_diff,
        }


def hindsight_inputs(net: UncertainNetwork, states: np.ndarray) -> np.ndarray:
    """Edge inputs the true-model H-infinity law would apply along ``states[:-1]``."""
    return np.array([hinf_policy(net.graph, x, net.true_a, net.b).edge_inputs for x in states[:-1]]).reshape(
        len(states) - 1, net.graph.edge_count
    )


def compare(
    net: UncertainNetwork,
    disturbance: DisturbanceSpec,
    T: int,
    gamma_eval: float = 0.0,
    x0: np.ndarray | None = None,
) -> Comparison:
    """Minimax, H-infinity and zero control against one disturbance realisation."""
    traces, metrics = {}, {}
    for kind in CONTROLLERS:
        traces[kind], metrics[kind] = run(net, kind, disturbance, T, gamma_eval, x0)
    mm, hi = traces["minimax"], traces["hinf"]
    hindsight = hindsight_inputs(net, mm.states)
    return Comparison(
        traces=traces,
        metrics=metrics,
        state_diff_l1=np.abs(mm.states - hi.states).sum(axis=1),
        control_diff_l1=np.abs(mm.edge_inputs - hi.edge_inputs).sum(axis=1),
        hindsight_control_diff_l1=np.abs(mm.edge_inputs - hindsight).sum(axis=1),
        first_node_state_diff=np.abs(mm.states[:, 0] - hi.states[:, 0]),
        first_edge_control_diff=np.abs(mm.edge_inputs[:, 0] - hi.edge_inputs[:, 0]),
    )


@dataclass(frozen=True, eq=False)
class GainSweep:
    controller_kind: str
    seeds: tuple[int, ...]
    gains: np.ndarray
    per_node_ratio: np.ndarray  # (seeds, N) sqrt(node output energy / node disturbance energy)

    @property
    def max_gain(self) -> float:
        return float(self.gains.max())

    @property
    def mean_gain(self) -> float:
        return float(self.gains.mean())

    def to_record(self) -> dict:
        return {
            "controller": self.controller_kind,
            "seeds": list(self.seeds),
            "gains": self.gains.tolist(),
            "max_gain": self.max_gain,
            "mean_gain": self.mean_gain,
            "per_node_ratio_max": float(self.per_node_ratio.max()),
        }


def node_gain_ratios(trace: SimulationTrace) -> np.ndarray:
    out = (trace.states**2).sum(axis=0) + (trace.node_controls**2).sum(axis=0)
    dist = (trace.disturbances**2).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sqrt(np.where(dist > 0, out / dist, 0.0))


def empirical_gain_sweep(
    net: UncertainNetwork,
    controller_kind: str,
    seeds,
    T: int,
    variance: float = 0.1,
) -> GainSweep:
    """Empirical gains under seeded Gaussian disturbances, zero initial state."""
    seeds = tuple(int(s) for s in seeds)
    gains, ratios = [], []
    for s in seeds:
        trace, m = run(net, controller_kind, DisturbanceSpec("gaussian", variance, s), T)
        gains.append(m.empirical_gain)
        ratios.append(node_gain_ratios(trace))
    return GainSweep(controller_kind, seeds, np.array(gains), np.array(ratios))


def replay_states(net: UncertainNetwork, trace: SimulationTrace) -> np.ndarray:
    """Re-step the recorded inputs and disturbances through the node dynamics."""
    states = np.empty_like(trace.states)
    states[0] = trace.states[0]
    for t in range(trace.horizon):
        states[t + 1] = step_network(net, states[t], trace.node_controls[t], trace.disturbances[t])
    return states


def edge_inputs_consistent(net: UncertainNetwork, trace: SimulationTrace) -> bool:
    return all(
        np.array_equal(trace.edge_inputs[t], edge_differences(net.graph, trace.node_controls[t]))
        for t in range(trace.horizon)
    )
