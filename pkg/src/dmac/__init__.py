"""Distributed minimax adaptive control for networks with uncertain local dynamics."""

from dmac.bounds import GainBounds, compute_bounds, gamma_lower, gamma_thm1, gamma_upper, zero_control_gain
from dmac.controllers import ControlDecision, MinimaxBank, MinimaxNodeState, hinf_policy, minimax_policy, zero_policy
from dmac.disturbances import DisturbanceSpec
from dmac.dynamics import CandidateSet, UncertainNetwork, build_network, validate_network
from dmac.graph import NetworkGraph, generate_line, generate_star, generate_tree
from dmac.simulate import RunMetrics, SimulationTrace, compare, run

__all__ = [
    "CandidateSet",
    "ControlDecision",
    "DisturbanceSpec",
    "GainBounds",
    "MinimaxBank",
    "MinimaxNodeState",
    "NetworkGraph",
    "RunMetrics",
    "SimulationTrace",
    "UncertainNetwork",
    "build_network",
    "compare",
    "compute_bounds",
    "gamma_lower",
    "gamma_thm1",
    "gamma_upper",
    "generate_line",
    "generate_star",
    "generate_tree",
    "hinf_policy",
    "minimax_policy",
    "run",
    "validate_network",
    "zero_control_gain",
    "zero_policy",
]
