import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmac.dynamics import (
    AdmissibilityError,
    CandidateSet,
    UncertainNetwork,
    admissible_interval,
    build_network,
    infer_disturbance,
    is_admissible,
    sample_candidates,
    step_network,
    step_network_compact,
    step_network_distributed,
    step_node,
    validate_network,
)
from dmac.graph import edge_differences, generate_line, generate_star, generate_tree


@pytest.mark.parametrize(
    "b, d, expected",
    [(0.1, 1, (0.020416847668728, 0.979583152331272)), (0.1, 2, (0.041742430504416, 0.958257569495584))],
)
def test_admissible_interval(b, d, expected):
    lo, hi = admissible_interval(b, d)
    assert lo == pytest.approx(expected[0], abs=1e-12)
    assert hi == pytest.approx(expected[1], abs=1e-12)
    eps = 1e-9
    assert is_admissible(lo + eps, b, d) and is_admissible(hi - eps, b, d)
    assert not is_admissible(lo - eps, b, d) and not is_admissible(hi + eps, b, d)


def test_admissible_interval_boundary():
    with pytest.raises(AdmissibilityError):
        admissible_interval(math.sqrt(1 / 8), 1)


def test_validate_network_flags_local_violation():
    g = generate_line(3)
    cands = (CandidateSet((0.5,)), CandidateSet((0.5, 0.99)), CandidateSet((0.5,)))
    net = UncertainNetwork(g, 0.1, cands, np.zeros(3, dtype=int))
    problems = validate_network(net)
    assert len(problems) == 1
    assert problems[0].node == 1 and problems[0].value == 0.99
    assert problems[0].condition == "local_admissibility"


def test_validate_network_flags_edge_gain():
    net = UncertainNetwork(generate_line(2), 0.5, (CandidateSet((0.5,)),) * 2, np.zeros(2, dtype=int))
    assert "edge_gain" in {p.condition for p in validate_network(net)}


def test_sample_candidates_examples():
    single = sample_candidates(0.1, 1, 1, seed=3)
    lo, hi = admissible_interval(0.1, 1)
    assert len(single) == 1 and lo < single.values[0] < hi
    pair = sample_candidates(0.1, 1, 2, seed=3, separation=0.1)
    assert all(0.0205 < v < 0.9795 for v in pair.values)
    assert pair.values[1] - pair.values[0] >= 0.1
    assert sample_candidates(0.1, 2, 3, seed=11).values == sample_candidates(0.1, 2, 3, seed=11).values


def test_sample_candidates_impossible_separation():
    with pytest.raises(ValueError):
        sample_candidates(0.1, 1, 3, seed=0, separation=0.6)


def test_reference_configuration_is_valid():
    net = build_network(generate_tree(10_000, 0), 0.1, 2, 0, true_index=1)
    assert validate_network(net) == []
    assert all(len(c) == 2 for c in net.candidates)
    assert np.all(np.abs(net.true_a) < 1)


@given(st.integers(2, 40), st.integers(1, 4), st.integers(0, 10_000))
def test_sampled_networks_are_valid_and_schur(n, m, seed):
    net = build_network(generate_tree(n, seed), 0.1, m, seed, separation=0.02)
    assert validate_network(net) == []
    assert np.all((net.candidate_table > 0) & (net.candidate_table < 1))


def test_step_node_examples():
    assert step_node(0.5, 1.0, 0.0, 0.0) == 0.5
    assert step_node(0.5, 0.0, 0.0, 0.3) == 0.3
    assert step_node(0.8, 1.0, 2.0, -0.1, b=0.1) == pytest.approx(0.9, abs=1e-15)


def test_compact_examples(line2_net):
    net = line2_net
    x = np.array([1.0, -2.0])
    assert np.array_equal(step_network_compact(net, x, np.zeros(1), np.zeros(2)), net.true_a * x)
    assert np.allclose(step_network_compact(net, np.zeros(2), np.ones(1), np.zeros(2)), [0.1, -0.1], atol=1e-15)
    with pytest.raises(ValueError):
        step_network_compact(net, np.zeros(3), np.ones(1), np.zeros(2))


def test_distributed_matches_compact_trajectory():
    rng = np.random.default_rng(5)
    net = build_network(generate_tree(20, 5), 0.1, 3, 5)
    x_d = x_c = x_v = rng.normal(size=20)
    for _ in range(50):
        u = rng.normal(size=20)
        w = rng.normal(size=20)
        x_d = step_network_distributed(net, x_d, u, w)
        x_c = step_network_compact(net, x_c, edge_differences(net.graph, u), w)
        x_v = step_network(net, x_v, u, w)
        assert np.max(np.abs(x_d - x_c)) <= 1e-12
        assert np.max(np.abs(x_v - x_c)) <= 1e-12


@given(
    st.floats(0.01, 0.99),
    st.floats(-100, 100),
    st.floats(-100, 100),
    st.floats(-100, 100),
    st.floats(0.001, 0.3),
)
def test_infer_disturbance_round_trip(a, x, diff_sum, w, b):
    x_next = step_node(a, x, diff_sum, w, b)
    assert abs(infer_disturbance(a, x, diff_sum, x_next, b) - w) <= 1e-12 * (1 + abs(x) + abs(diff_sum) + abs(w))


def test_infer_disturbance_wrong_model():
    a_true, a_wrong, x, s, w, b = 0.4, 0.7, 1.5, 0.3, 0.2, 0.1
    x_next = step_node(a_true, x, s, w, b)
    assert infer_disturbance(a_wrong, x, s, x_next, b) == pytest.approx(w - (a_wrong - a_true) * x, abs=1e-15)
    assert infer_disturbance(a_true, x, s, step_node(a_true, x, s, 0.0, b), b) == pytest.approx(0.0, abs=1e-15)


def test_candidate_set_invariants():
    with pytest.raises(ValueError):
        CandidateSet(())
    with pytest.raises(ValueError):
        CandidateSet((0.3, 0.3))
    with pytest.raises(ValueError):
        CandidateSet((0.5, 0.3))


def test_network_round_trip(small_tree_net):
    again = UncertainNetwork.from_dict(small_tree_net.to_dict())
    assert np.array_equal(again.candidate_table, small_tree_net.candidate_table)
    assert np.array_equal(again.true_index, small_tree_net.true_index)


def test_star_b_limit():
    g = generate_star(10)
    with pytest.raises(AdmissibilityError):
        build_network(g, 0.5, 1, 0)
