import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prasym.errors import ParameterError, StructuralError
from prasym.graphs import (
    Graph,
    SbmParams,
    expected_adjacency_chung_lu,
    expected_adjacency_sbm,
    gen_chung_lu,
    gen_sbm,
    gen_er,
)
from prasym.pagerank import point_mass, uniform_preference
from prasym.spectral import dense_Q
from prasym.verifiers import (
    BoundCheck,
    bernstein_deviation,
    bernstein_tail,
    check_adjacency_norm,
    check_degree_concentration,
    check_degree_ratio,
    check_q_norm,
    check_qtilde_vprime,
    check_s_infty_norm,
    check_spectral_expansion,
    error_bound_chain,
    matrix_bernstein_tail,
    pass_rate,
    s_column,
    s_columns,
    sweep_passes,
)

from conftest import complete_graph, cycle_graph


def test_boundcheck_passed_property():
    assert BoundCheck("x", 1.0, 1.0, 1.0, 5).passed
    assert not BoundCheck("x", 1.1, 1.0, 1.0, 5).passed
    row = BoundCheck("x", 0.5, 1.0, 2.0, 5, 3, ("a", "b")).row()
    assert row["passed"] and row["flags"] == "a;b"


def test_degree_concentration_exact_degrees(p3):
    c = check_degree_concentration(p3, p3.degrees.astype(float))
    assert c.measured == 0 and c.passed


def test_degree_concentration_flags_uninformative(p3):
    c = check_degree_concentration(p3, np.array([0.5, 2.0, 0.5]))
    assert "uninformative" in c.flags
    with pytest.raises(ParameterError):
        check_degree_concentration(p3, np.array([0.0, 1.0, 1.0]))


def test_degree_concentration_chung_lu_statistical():
    n, w = 4000, 80.0
    checks = [check_degree_concentration(gen_chung_lu(np.full(n, w), s), np.full(n, w), 4.0, s) for s in range(20)]
    assert pass_rate(checks) >= 0.95


def test_degree_ratio(p3):
    assert check_degree_ratio(cycle_graph(6), 1.0).measured == 1.0
    assert check_degree_ratio(p3, 2.0).measured == 2.0
    with pytest.raises(StructuralError):
        check_degree_ratio(Graph.from_edges(3, [(0, 1)]), 2.0)


def test_spectral_expansion(p3, k3):
    assert check_spectral_expansion(k3, 0.6).measured == pytest.approx(0.5, abs=1e-7)
    c = check_spectral_expansion(p3, 0.5)
    assert c.measured == pytest.approx(1.0, abs=1e-7) and not c.passed


def test_adjacency_norm_complete_graph():
    n = 12
    g = complete_graph(n)
    params = SbmParams(n // 2, n, 1.0, 1.0)
    assert check_adjacency_norm(g, params).measured == pytest.approx(1.0, rel=1e-6)
    assert check_adjacency_norm(g, params, zero_diagonal=True).measured == pytest.approx(0.0, abs=1e-6)


def test_adjacency_norm_zero_probability():
    g = Graph.from_edges(10, [])
    assert check_adjacency_norm(g, SbmParams(5, 10, 0.0, 0.0)).measured == 0.0


def test_adjacency_norm_sbm_statistical():
    params = SbmParams(1024, 2048, 0.1, 0.01)
    checks = [check_adjacency_norm(gen_sbm(params, s), params, 3.0, s, method="lanczos") for s in range(10)]
    assert all(c.passed for c in checks)


def test_q_norm_dense_oracle():
    n = 40
    g = complete_graph(n)
    params = SbmParams(n // 2, n, 1.0, 1.0)
    w = params.expected_degrees()
    qbar = expected_adjacency_sbm(params).dense() / np.sqrt(np.outer(w, w))
    exact = np.linalg.norm(dense_Q(g) - qbar, 2)
    assert check_q_norm(g, params, tol=1e-10).measured == pytest.approx(exact, abs=1e-8)


def test_q_norm_identical_operators_is_zero():
    # a graph whose Q equals Qbar exactly: Chung-Lu expectation built from K2 itself
    g = Graph.from_edges(2, [(0, 1)])
    ea = expected_adjacency_chung_lu(np.array([1.0, 1.0]))

    class Exact(type(ea)):
        def matvec(self, x):
            return np.array([x[1], x[0]])

    assert check_q_norm(g, Exact(np.array([1.0, 1.0]))).measured == pytest.approx(0.0, abs=1e-12)


def test_q_norm_sbm_statistical():
    params = SbmParams(1024, 2048, 0.1, 0.01)
    checks = [check_q_norm(gen_sbm(params, s), params, 3.0, s, method="lanczos") for s in range(10)]
    assert all(c.passed for c in checks)


@pytest.mark.parametrize("n", [30, 120])
def test_dense_vs_iterative_norm_checks(n):
    params = SbmParams(n // 2, n, 0.5, 0.1)
    g = gen_sbm(params, 9)
    ea = expected_adjacency_sbm(params)
    exact_a = np.linalg.norm(g.to_dense() - ea.dense(), 2)
    assert abs(check_adjacency_norm(g, params, tol=1e-10).measured - exact_a) <= 1e-6
    w = params.expected_degrees()
    exact_q = np.linalg.norm(dense_Q(g) - ea.dense() / np.sqrt(np.outer(w, w)), 2)
    assert abs(check_q_norm(g, params, tol=1e-10).measured - exact_q) <= 1e-6


def test_qtilde_path3(p3):
    c = check_qtilde_vprime(p3, uniform_preference(3), w_min=1.0)
    assert c.measured == pytest.approx(math.sqrt(2) / 4, abs=1e-12)


def test_qtilde_scaled_trend():
    # uniform v, equal weights growing like n^(1/3): sqrt(w) * ||Q~ v'|| shrinks
    vals = []
    for n in (1024, 8192):
        w = 5 * n ** (1 / 3)
        runs = []
        for seed in range(3):
            g = gen_chung_lu(np.full(n, w), seed)
            g = g.subgraph(g.largest_component())
            runs.append(check_qtilde_vprime(g, uniform_preference(g.n), w).measured * math.sqrt(w))
        vals.append(np.median(runs))
    assert vals[1] < vals[0]


def test_qtilde_point_mass_does_not_shrink():
    vals = []
    for n in (512, 2048):
        p = 40 / n
        g = gen_er(n, p, 3)
        g = g.subgraph(g.largest_component())
        vals.append(check_qtilde_vprime(g, point_mass(g.n, 0), n * p).measured * math.sqrt(n * p))
    assert vals[1] >= 0.5 * vals[0]


def test_s_norm_examples(p3, k3):
    assert check_s_infty_norm(k3, 0.0).measured == pytest.approx(1.0)
    k = check_s_infty_norm(k3, 0.5)
    assert k.measured == pytest.approx(2.0, abs=1e-12)
    assert k.passed
    c = check_s_infty_norm(p3, 0.5)
    s = np.linalg.inv(np.eye(3) - 0.5 * dense_Q(p3))
    assert c.measured == pytest.approx(np.abs(s).sum(axis=1).max(), abs=1e-12)
    assert c.bound == pytest.approx(math.sqrt(2) * 2)
    assert c.passed
    with pytest.raises(ParameterError):
        check_s_infty_norm(p3, 1.0)


def test_s_columns_match_dense():
    g = gen_er(150, 0.1, 2)
    g = g.subgraph(g.largest_component())
    s = np.linalg.inv(np.eye(g.n) - 0.85 * dense_Q(g))
    rows = [0, 7, 33]
    assert np.allclose(s_columns(g, 0.85, rows), s[:, rows], atol=1e-11)
    assert np.allclose(s_column(g, 0.85, 7), s[:, 7], atol=1e-11)


def test_s_norm_sampled_mode_is_lower_bound():
    g = gen_er(300, 0.1, 4)
    g = g.subgraph(g.largest_component())
    exact = check_s_infty_norm(g, 0.85)
    sampled = check_s_infty_norm(g, 0.85, sample_rows=10, seed=1, dense_limit=100)
    assert sampled.flags == ("sampled", "lower_bound")
    assert sampled.measured <= exact.measured + 1e-10
    assert sampled.bound == exact.bound


def test_bernstein_examples():
    assert bernstein_tail(1, 1, 10) == pytest.approx(2 * math.exp(-150 / 13))
    assert bernstein_tail(1, 1, 1e-9) == pytest.approx(2.0)
    eps = bernstein_deviation(5.0, 1.0, 0.01)
    assert bernstein_tail(5.0, 1.0, eps) == pytest.approx(0.01)
    with pytest.raises(ParameterError):
        bernstein_tail(1, 0, 1)


@given(B2=st.floats(0, 100), b=st.floats(0.01, 10), e1=st.floats(0.01, 50), e2=st.floats(0.01, 50))
def test_bernstein_monotone(B2, b, e1, e2):
    lo, hi = sorted((e1, e2))
    assert bernstein_tail(B2, b, hi) <= bernstein_tail(B2, b, lo)


def test_matrix_bernstein_examples():
    assert matrix_bernstein_tail(3.0, 1.0, 0.0, 4, 5) == 9
    n, wmax = 2048, 112.5
    t = 3 * math.sqrt(math.log(n) * wmax)
    val = matrix_bernstein_tail(wmax, 1.0, t, n, n)
    assert val == pytest.approx(2 * n * math.exp(-(t * t / 2) / (wmax + t / 3)))
    assert val < 1e-3


@given(s2=st.floats(0, 50), R=st.floats(0, 5), t1=st.floats(0, 100), t2=st.floats(0, 100))
def test_matrix_bernstein_monotone(s2, R, t1, t2):
    lo, hi = sorted((t1, t2))
    assert matrix_bernstein_tail(s2, R, hi, 3, 3) <= matrix_bernstein_tail(s2, R, lo, 3, 3)


@pytest.mark.parametrize("seed", range(8))
def test_error_bound_chain(seed):
    rng = np.random.default_rng(seed)
    g = gen_er(int(rng.integers(20, 150)), 0.2, seed)
    g = g.subgraph(g.largest_component())
    v = rng.random(g.n)
    v /= v.sum()
    lhs, rhs = error_bound_chain(g, v, float(rng.uniform(0.1, 0.9)))
    assert lhs <= rhs


def test_sweep_passes():
    checks = [BoundCheck("x", float(i == 0), 0.5, 1.0, n) for n in (10, 20) for i in range(10)]
    assert sweep_passes(checks)
    checks.append(BoundCheck("x", 1.0, 0.5, 1.0, 10))
    assert not sweep_passes(checks)
    with pytest.raises(ParameterError):
        pass_rate([])
