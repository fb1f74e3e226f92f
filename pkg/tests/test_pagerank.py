import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prasym.errors import ParameterError, SizeError, StructuralError
from prasym.graphs import Graph, gen_er
from prasym.pagerank import (
    PageRankConfig,
    fixed_point_residual,
    pagerank_dense,
    pagerank_power,
    pagerank_series,
    point_mass,
    preference_vector,
    stationary,
    uniform_preference,
)

from conftest import complete_graph, cycle_graph

PI_P3 = np.array([5 / 18, 4 / 9, 5 / 18])


def connected_er(n, p, seed):
    g = gen_er(n, p, seed)
    return g.subgraph(g.largest_component())


def test_power_path3(p3):
    res = pagerank_power(p3, uniform_preference(3), PageRankConfig(0.5, 1e-12))
    assert res.converged
    assert np.allclose(res.pi, PI_P3, atol=1e-12)
    assert res.residual <= 1e-12


def test_dense_path3(p3):
    assert np.allclose(pagerank_dense(p3, uniform_preference(3), 0.5).pi, PI_P3, atol=1e-14)


def test_alpha_zero_returns_v(p3):
    v = np.array([0.2, 0.3, 0.5])
    assert np.array_equal(pagerank_power(p3, v, PageRankConfig(0.0)).pi, v)
    assert np.allclose(pagerank_dense(p3, v, 0.0).pi, v)
    vec, _ = pagerank_series(p3, v, 0.0, 7)
    assert np.allclose(vec, v)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.85, 0.99])
def test_complete_graph_uniform_fixed_point(alpha):
    res = pagerank_power(complete_graph(3), uniform_preference(3), PageRankConfig(alpha))
    assert np.allclose(res.pi, 1 / 3, atol=1e-13)


@pytest.mark.parametrize("alpha", [0.15, 0.5, 0.85])
def test_stationary_is_fixed_point(alpha):
    g = connected_er(80, 0.1, 4)
    stat = g.degrees / g.volume
    assert np.allclose(pagerank_dense(g, stat, alpha).pi, stat, atol=1e-14)


def test_series_examples(p3):
    v = uniform_preference(3)
    vec, tail = pagerank_series(p3, v, 0.5, 0)
    assert np.allclose(vec, 0.5 * v) and tail == 0.5
    vec, tail = pagerank_series(p3, v, 0.5, 40)
    assert np.abs(vec - PI_P3).sum() <= 2.0**-40 + 1e-12
    assert tail == 2.0**-41


def test_stationary(p3, k3):
    assert np.allclose(stationary(p3), [0.25, 0.5, 0.25])
    assert np.allclose(stationary(k3), 1 / 3)
    assert np.allclose(stationary(cycle_graph(7)), 1 / 7)
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.warns(UserWarning, match="disconnected"):
        stationary(g)


def test_preference_validation():
    with pytest.raises(ParameterError):
        preference_vector([0.5, 0.6])
    with pytest.raises(ParameterError):
        preference_vector([1.5, -0.5])
    with pytest.raises(ParameterError):
        preference_vector([0.5, 0.5], n=3)
    preference_vector([0.5, 0.5 + 5e-13])


def test_config_validation():
    with pytest.raises(ParameterError):
        PageRankConfig(alpha=1.0)
    with pytest.raises(ParameterError):
        PageRankConfig(tol=0)
    with pytest.raises(ParameterError):
        PageRankConfig(max_iter=0)


def test_isolated_vertex_rejected():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(StructuralError):
        pagerank_power(g, uniform_preference(3))


def test_nonconvergence_flagged():
    g = connected_er(100, 0.1, 1)
    with pytest.warns(UserWarning, match="max_iter"):
        res = pagerank_power(g, point_mass(g.n, 0), PageRankConfig(0.85, 1e-14, 3))
    assert not res.converged
    assert res.iterations == 3


def test_disconnected_graph_runs_and_is_flagged():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    res = pagerank_power(g, uniform_preference(4))
    assert res.converged and not res.connected
    assert np.allclose(res.pi, 0.25)


def test_dense_size_limit():
    g = cycle_graph(20)
    with pytest.raises(SizeError):
        pagerank_dense(g, uniform_preference(20), 0.5, dense_limit=10)


@given(
    seed=st.integers(0, 5000),
    n=st.integers(10, 120),
    alpha=st.sampled_from([0.15, 0.5, 0.85]),
    point=st.booleans(),
)
def test_power_matches_dense_and_is_probability(seed, n, alpha, point):
    g = connected_er(n, 0.15, seed)
    v = point_mass(g.n, seed % g.n) if point else uniform_preference(g.n)
    res = pagerank_power(g, v, PageRankConfig(alpha, 1e-12))
    assert res.converged
    assert np.all(res.pi >= 0)
    assert abs(res.pi.sum() - 1) <= 1e-12
    assert fixed_point_residual(g, res.pi, v, alpha) <= 2e-12
    assert np.max(np.abs(res.pi - pagerank_dense(g, v, alpha).pi)) <= 1e-10


@given(seed=st.integers(0, 5000), k=st.integers(0, 80), alpha=st.floats(0.05, 0.95))
def test_series_tail_bound(seed, k, alpha):
    g = connected_er(40, 0.2, seed)
    v = uniform_preference(g.n)
    vec, tail = pagerank_series(g, v, alpha, k)
    assert np.abs(vec - pagerank_dense(g, v, alpha).pi).sum() <= tail + 1e-12
