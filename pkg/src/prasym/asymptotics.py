"""Closed-form asymptotic PageRank approximations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalError, ParameterError, StructuralError
from .graphs import Graph, SbmParams
from .pagerank import preference_vector


@dataclass(frozen=True)
class SbmApproxStructure:
    beta: float
    u: np.ndarray
    community_sums: tuple[float, float]


def approx_mixture(g: Graph, v, alpha: float) -> np.ndarray:
    """``alpha d / vol + (1 - alpha) v``."""
    if g.volume == 0:
        raise StructuralError("graph has no edges")
    if not (0.0 <= alpha <= 1.0):
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    v = preference_vector(v, g.n)
    return alpha * (g.degrees / g.volume) + (1 - alpha) * v


def split_vector(n: int, m: int) -> np.ndarray:
    u = np.full(n, -1.0 / np.sqrt(n))
    u[:m] = 1.0 / np.sqrt(n)
    return u


def sbm_structure(params: SbmParams, v) -> SbmApproxStructure:
    v = np.asarray(v, dtype=float)
    m = params.m
    return SbmApproxStructure(
        beta=params.beta,
        u=split_vector(params.n, m),
        community_sums=(float(v[:m].sum()), float(v[m:].sum())),
    )


def approx_sbm_general(params: SbmParams, v, alpha: float) -> np.ndarray:
    """``(1 - alpha)(I - alpha Pbar)^-1 v`` with ``Pbar = E(A) W^-1``, in O(n).

    ``Pbar x`` is constant on each community and only depends on
    ``s_k = sum_{j in C_k} x_j / w_k``, so the fixed point reduces to a 2x2
    system in ``(s_1, s_2)``.
    """
    if not (0.0 <= alpha < 1.0):
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")
    v = preference_vector(v, params.n)
    m, n, p, q = params.m, params.n, params.p, params.q
    w1, w2 = params.community_degrees
    a = (1 - alpha) * v
    a1, a2 = a[:m].sum(), a[m:].sum()
    # s1 = a1/w1 + alpha*m/w1*(p s1 + q s2),  s2 = a2/w2 + alpha*(n-m)/w2*(q s1 + p s2)
    mat = np.array(
        [
            [w1 - alpha * m * p, -alpha * m * q],
            [-alpha * (n - m) * q, w2 - alpha * (n - m) * p],
        ]
    )
    det = np.linalg.det(mat)
    if abs(det) <= 1e-14 * np.abs(mat).max() ** 2:
        raise InternalError("singular community reduction (alpha < 1 should prevent this)")
    s1, s2 = np.linalg.solve(mat, [a1, a2])
    out = a.copy()
    out[:m] += alpha * (p * s1 + q * s2)
    out[m:] += alpha * (q * s1 + p * s2)
    return out


def approx_sbm_equal(n: int, p: float, q: float, v, alpha: float) -> np.ndarray:
    """Equal communities: ``alpha/n 1 + (1 - alpha)(v + ab/(1 - ab) (v.u) u)`` with ``b = (p-q)/(p+q)``."""
    if n % 2:
        raise ParameterError(f"equal communities need even n, got {n}")
    if not (0.0 <= alpha < 1.0):
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")
    if p + q <= 0:
        raise ParameterError("p + q must be positive")
    v = preference_vector(v, n)
    beta = (p - q) / (p + q)
    if alpha * beta >= 1:
        raise ParameterError("alpha * beta must be < 1")
    u = split_vector(n, n // 2)
    coef = alpha * beta / (1 - alpha * beta)
    return alpha / n + (1 - alpha) * (v + coef * (v @ u) * u)


def dense_sbm_markov(params: SbmParams) -> np.ndarray:
    """Explicit ``Pbar = E(A) W^-1`` (diagonal p convention); test oracle only."""
    from .graphs import expected_adjacency_sbm

    ea = expected_adjacency_sbm(params)
    return ea.dense() / ea.expected_degrees()[None, :]


def approx_sbm_dense(params: SbmParams, v, alpha: float) -> np.ndarray:
    v = preference_vector(v, params.n)
    pbar = dense_sbm_markov(params)
    return np.linalg.solve(np.eye(params.n) - alpha * pbar, (1 - alpha) * v)


def error_vector(pi, pibar) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    pibar = np.asarray(pibar, dtype=float)
    if pi.shape != pibar.shape:
        raise ParameterError(f"length mismatch: {pi.shape} vs {pibar.shape}")
    return pi - pibar


def spectral_pagerank(g: Graph, v, alpha: float) -> np.ndarray:
    """PageRank rebuilt from the dense eigendecomposition of Q."""
    from .spectral import dense_spectrum

    vals, vecs = dense_spectrum(g)
    v = preference_vector(v, g.n)
    sq = np.sqrt(g.degrees.astype(float))
    coeffs = vecs.T @ (v / sq)
    return (1 - alpha) * sq * (vecs @ (coeffs / (1 - alpha * vals)))
