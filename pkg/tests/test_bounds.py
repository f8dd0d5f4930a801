import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmac import bounds
from dmac.bounds import (
    GainBounds,
    NoPositiveRootError,
    compute_bounds,
    cubic_coefficients,
    gamma_lower,
    gamma_thm1,
    gamma_upper,
    gamma_upper_roots,
    lemma3_check,
    poly_eval,
    poly_scale,
    riccati_residual,
    smallest_eigenvalue,
    smallest_positive_root_bisection,
    zero_control_gain,
)
from dmac.dynamics import AdmissibilityError, CandidateSet, UncertainNetwork, admissible_interval, build_network
from dmac.graph import generate_line, generate_star, generate_tree


def _freq_sweep_gain(a: float) -> float:
    omega = np.linspace(0.0, np.pi, 20001)
    return float(np.max(np.abs(1.0 / (np.exp(1j * omega) - a))))


def test_zero_control_gain_values():
    assert zero_control_gain(0.1, 1) == pytest.approx(48.97915761656, rel=1e-10)
    assert zero_control_gain(0.1, 1) == pytest.approx(_freq_sweep_gain(admissible_interval(0.1, 1)[1]), rel=1e-12)
    assert zero_control_gain(0.15, 2) == pytest.approx(10.0, rel=1e-12)
    with pytest.raises(AdmissibilityError):
        zero_control_gain(0.4, 1)


def test_zero_control_gain_grows_as_b_shrinks():
    gains = [zero_control_gain(b, 1) for b in (0.3, 0.1, 0.03, 0.01, 0.001)]
    assert all(x < y for x, y in zip(gains, gains[1:]))


def test_gamma_lower_diagonal_limit():
    net = build_network(generate_tree(12, 0), 1e-7, 2, 0)
    assert gamma_lower(net) == pytest.approx(1.0 / (1.0 - net.a_bar), rel=1e-6)


@pytest.mark.parametrize("n, seed", [(2, 0), (10, 1), (30, 2), (30, 3)])
def test_gamma_lower_dense_oracle(n, seed):
    net = build_network(generate_tree(n, seed), 0.1, 2, seed)
    mat = bounds.lower_bound_matrix(net).toarray()
    oracle = 1.0 / math.sqrt(np.linalg.eigvalsh(mat)[0])
    assert gamma_lower(net) == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("n, seed", [(50, 4), (120, 5), (200, 6)])
def test_gamma_lower_sparse_vs_dense(n, seed):
    net = build_network(generate_tree(n, seed), 0.1, 3, seed)
    assert gamma_lower(net, "sparse") == pytest.approx(gamma_lower(net, "dense"), rel=1e-7)


def test_smallest_eigenvalue_iteration_cap():
    mat = np.diag([1.0, 1.0 + 1e-9, 2.0])
    with pytest.raises(RuntimeError):
        smallest_eigenvalue(mat, tol=1e-300, max_iter=5)


def test_lemma3_examples():
    assert lemma3_check([0.9], 10.0)
    assert not lemma3_check([0.99], 5.0)
    with pytest.raises(ValueError):
        lemma3_check([0.5], 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_lemma3_holds_at_gamma_lower(seed):
    net = build_network(generate_tree(40, seed), 0.1, 2, seed)
    assert lemma3_check(net.node_upper, gamma_lower(net))


def test_riccati_residual_small_example():
    cands = (CandidateSet((0.3, 0.5)),) * 2
    net = UncertainNetwork(generate_line(2), 0.1, cands, np.array([1, 1]))
    gu = gamma_upper(net.a_bar, net.a_lower)
    assert riccati_residual([0.5, 0.5], net.graph, 0.1, gu) >= -1e-8
    assert riccati_residual([0.5, 0.5], net.graph, 0.1, 1e8) >= -1e-8
    with pytest.raises(ValueError):
        riccati_residual([0.5, 0.5], net.graph, 0.1, 1.0)


def test_riccati_residual_outside_hypothesis_runs():
    # inadmissible parameters: the value is only reported
    value = riccati_residual([0.99, 0.5, 0.5], generate_star(3), 0.1, 200.0)
    assert math.isfinite(value)


def test_gamma_thm1_scalar_reduction():
    # on each Laplacian eigenvalue lam the ratio reduces to 1 / ((1 - a)^2 + b^2 lam);
    # lam = 0 dominates, so the bound is 1 / (1 - a)
    for a in (0.2, 0.5, 0.9):
        assert gamma_thm1(a, generate_line(2), 0.1) == pytest.approx(1.0 / (1.0 - a), rel=1e-12)
        assert gamma_thm1(a, generate_tree(9, 1), 1e-6) == pytest.approx(1.0 / (1.0 - a), rel=1e-12)


@pytest.mark.parametrize("graph", [generate_line(2), generate_tree(25, 3), generate_star(6)])
def test_gamma_thm1_dense_vs_spectral(graph):
    for a in (0.3, 0.7, 0.95):
        assert gamma_thm1(a, graph, 0.1, "dense") == pytest.approx(gamma_thm1(a, graph, 0.1, "spectral"), rel=1e-10)


def test_gamma_thm1_large_graph_path():
    g = generate_tree(bounds.DENSE_SPECTRUM_LIMIT + 500, 0)
    assert gamma_thm1(0.9, g, 0.1) == pytest.approx(10.0, rel=1e-10)


def test_gamma_thm1_monotone():
    g = generate_tree(15, 2)
    vals = [gamma_thm1(a, g, 0.1) for a in np.linspace(0.1, 0.95, 12)]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_cubic_coefficients_example():
    f = cubic_coefficients(0.9, 0.5)
    assert f == pytest.approx((0.002, 0.0705, -35.06, -100.0), rel=1e-12)
    assert cubic_coefficients(0.6, 0.6)[0] == 0.0
    with pytest.raises(ZeroDivisionError):
        cubic_coefficients(1.0, 0.5)


@given(st.floats(0.01, 0.99), st.floats(0.0, 1.0))
def test_cubic_signs(a_bar, frac):
    f1, _, _, f4 = cubic_coefficients(a_bar, frac * a_bar)
    assert f4 < 0 and f1 >= 0


def test_gamma_upper_example():
    beta, roots = gamma_upper_roots(0.9, 0.5)
    f = cubic_coefficients(0.9, 0.5)
    assert beta == pytest.approx(smallest_positive_root_bisection(f), rel=1e-8)
    # numpy.roots, an independent companion solve, gives 117.52704263
    assert beta == pytest.approx(117.52704263, rel=1e-9)
    assert abs(poly_eval(f, beta)) <= 1e-8 * poly_scale(f, beta)
    assert gamma_upper(0.9, 0.5) == pytest.approx(math.sqrt(beta))
    assert len(roots) == 3


def test_gamma_upper_degenerate_gap():
    # equal extremes: f1 = 0 and every remaining coefficient is negative
    with pytest.raises(NoPositiveRootError):
        gamma_upper(0.6, 0.6)


@given(st.floats(0.02, 0.98), st.floats(0.001, 0.99))
def test_gamma_upper_matches_bisection(a_bar, frac):
    a_lower = a_bar * frac
    f = cubic_coefficients(a_bar, a_lower)
    beta = gamma_upper_roots(a_bar, a_lower)[0]
    assert beta == pytest.approx(smallest_positive_root_bisection(f), rel=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_bound_magnitudes_large_tree(seed):
    net = build_network(generate_tree(10_000, seed), 0.1, 2, seed, true_index=1)
    b = compute_bounds(net)
    # reported instance: 13.5936 and 16.0161
    assert 15.5 < b.gamma_upper < 16.5
    assert 10.0 < b.gamma_lower < 20.0


def test_record_round_trip(small_tree_net):
    b = compute_bounds(small_tree_net)
    again = GainBounds.from_record(b.to_record())
    assert again.gamma_upper == b.gamma_upper and again.cubic == b.cubic
    assert np.array_equal(again.zero_control_gains, b.zero_control_gains)
    f = b.cubic
    assert abs(poly_eval(f, b.gamma_upper**2)) <= 1e-8 * max(1.0, poly_scale(f, b.gamma_upper**2))
