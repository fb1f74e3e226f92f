import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prasym.asymptotics import (
    approx_mixture,
    approx_sbm_dense,
    approx_sbm_equal,
    approx_sbm_general,
    error_vector,
    sbm_structure,
    spectral_pagerank,
    split_vector,
)
from prasym.errors import ParameterError, StructuralError
from prasym.graphs import Graph, SbmParams, gen_er
from prasym.pagerank import pagerank_dense, uniform_preference

from conftest import path_graph


def indicator(n, m, block=1):
    v = np.zeros(n)
    if block == 1:
        v[:m] = 1 / m
    else:
        v[m:] = 1 / (n - m)
    return v


def test_mixture_path3(p3):
    v = uniform_preference(3)
    assert np.allclose(approx_mixture(p3, v, 0.5), [7 / 24, 5 / 12, 7 / 24], atol=1e-15)
    assert np.allclose(approx_mixture(p3, v, 0.0), v)
    assert np.allclose(approx_mixture(p3, v, 1.0), [0.25, 0.5, 0.25])


def test_mixture_rejects_empty_graph():
    with pytest.raises(StructuralError):
        approx_mixture(Graph.from_edges(3, []), uniform_preference(3), 0.5)


def test_error_vector_path3(p3):
    v = uniform_preference(3)
    eps = error_vector(pagerank_dense(p3, v, 0.5).pi, approx_mixture(p3, v, 0.5))
    assert np.allclose(eps, np.array([-1, 2, -1]) / 72, atol=1e-15)
    with pytest.raises(ParameterError):
        error_vector([1.0], [0.5, 0.5])


def test_split_vector():
    u = split_vector(10, 4)
    assert np.linalg.norm(u) == pytest.approx(1.0)
    assert u.sum() == pytest.approx((2 * 4 - 10) / np.sqrt(10))


def test_structure():
    s = sbm_structure(SbmParams(3, 6, 0.1, 0.01), indicator(6, 3))
    assert s.beta == pytest.approx(9 / 11)
    assert s.community_sums == (1.0, 0.0)


def test_sbm_p_equals_q_gives_uniform():
    for m in (3, 10, 17):
        out = approx_sbm_general(SbmParams(m, 20, 0.3, 0.3), uniform_preference(20), 0.7)
        assert np.allclose(out, 1 / 20, atol=1e-15)


def test_sbm_uniform_v_is_fixed():
    n = 100
    for alpha in (0.15, 0.5, 0.85):
        assert np.allclose(approx_sbm_general(SbmParams(50, n, 0.1, 0.01), uniform_preference(n), alpha), 1 / n)
        assert np.allclose(approx_sbm_equal(n, 0.1, 0.01, uniform_preference(n), alpha), 1 / n)


def test_sbm_indicator_fixture():
    n = 100
    out = approx_sbm_general(SbmParams(50, n, 0.1, 0.01), indicator(n, 50), 0.5)
    assert np.allclose(out[:50] * n, 1.84615, atol=5e-6)
    assert np.allclose(out[50:] * n, 0.15385, atol=5e-6)
    eq = approx_sbm_equal(n, 0.1, 0.01, indicator(n, 50), 0.5)
    assert np.max(np.abs(out - eq)) <= 1e-12


def test_sbm_equal_rejects_odd_n():
    with pytest.raises(ParameterError):
        approx_sbm_equal(5, 0.1, 0.01, uniform_preference(5), 0.5)


@given(
    n=st.integers(4, 120),
    frac=st.floats(0.05, 0.95),
    p=st.floats(0.01, 1.0),
    ratio=st.floats(0.0, 1.0),
    alpha=st.floats(0.0, 0.99),
    seed=st.integers(0, 1000),
)
def test_sbm_general_matches_dense(n, frac, p, ratio, alpha, seed):
    m = min(max(1, int(frac * n)), n - 1)
    params = SbmParams(m, n, p, p * ratio)
    v = np.random.default_rng(seed).random(n)
    v /= v.sum()
    out = approx_sbm_general(params, v, alpha)
    assert np.max(np.abs(out - approx_sbm_dense(params, v, alpha))) <= 1e-12
    assert abs(out.sum() - 1) <= 1e-12


@given(
    half=st.integers(2, 60),
    p=st.floats(0.01, 1.0),
    ratio=st.floats(0.0, 1.0),
    alpha=st.floats(0.0, 0.99),
    seed=st.integers(0, 1000),
)
def test_sbm_closed_form_structure(half, p, ratio, alpha, seed):
    n = 2 * half
    q = p * ratio
    v = np.random.default_rng(seed).random(n)
    v /= v.sum()
    out = approx_sbm_equal(n, p, q, v, alpha)
    u = split_vector(n, half)
    beta = (p - q) / (p + q)
    resid = out - alpha / n - (1 - alpha) * v
    coef = (1 - alpha) * alpha * beta / (1 - alpha * beta) * (v @ u)
    assert np.allclose(resid, coef * u, atol=1e-14)
    assert np.max(np.abs(out - approx_sbm_general(SbmParams(half, n, p, q), v, alpha))) <= 1e-12


@given(seed=st.integers(0, 2000), alpha=st.floats(0, 1))
def test_mixture_is_probability(seed, alpha):
    g = gen_er(30, 0.3, seed)
    if g.volume == 0:
        return
    v = np.random.default_rng(seed).random(30)
    v /= v.sum()
    out = approx_mixture(g, v, alpha)
    assert np.all(out >= 0) and abs(out.sum() - 1) <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_spectral_reconstruction(seed):
    g = gen_er(200, 0.08, seed)
    g = g.subgraph(g.largest_component())
    v = np.random.default_rng(seed).random(g.n)
    v /= v.sum()
    for alpha in (0.15, 0.85):
        assert np.max(np.abs(spectral_pagerank(g, v, alpha) - pagerank_dense(g, v, alpha).pi)) <= 1e-8


def test_error_vector_sums_to_zero(rng):
    for _ in range(20):
        a, b = rng.random((2, 50))
        a /= a.sum()
        b /= b.sum()
        assert abs(error_vector(a, b).sum()) <= 1e-12
    x = path_graph(4).degrees / 6
    assert np.all(error_vector(x, x) == 0)
