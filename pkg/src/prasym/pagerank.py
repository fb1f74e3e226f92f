"""Personalized PageRank: power iteration, dense resolvent solve, truncated series."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SizeError, StructuralError
from .graphs import Graph
from .spectral import DENSE_LIMIT, matvec_P

logger = logging.getLogger(__name__)

__all__ = [
    "PageRankConfig",
    "PageRankResult",
    "preference_vector",
    "uniform_preference",
    "point_mass",
    "pagerank_power",
    "pagerank_dense",
    "pagerank_series",
    "stationary",
]


@dataclass(frozen=True)
class PageRankConfig:
    alpha: float = 0.85
    tol: float = 1e-12
    max_iter: int = 10_000

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ParameterError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")


@dataclass(frozen=True)
class PageRankResult:
    pi: np.ndarray
    residual: float
    iterations: int
    method: str
    converged: bool = True
    connected: bool = True


def preference_vector(v, n: int | None = None) -> np.ndarray:
    """Validate a restart distribution: nonnegative, sums to 1 within 1e-12."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ParameterError("preference vector must be 1-d")
    if n is not None and len(v) != n:
        raise ParameterError(f"preference vector has length {len(v)}, graph has {n} vertices")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ParameterError("preference vector has negative or non-finite entries")
    if abs(v.sum() - 1.0) > 1e-12:
        raise ParameterError(f"preference vector sums to {v.sum()!r}, not 1")
    return v


def uniform_preference(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def point_mass(n: int, k: int) -> np.ndarray:
    v = np.zeros(n)
    v[k] = 1.0
    return v


def _check_alpha(alpha):
    if not (0.0 <= alpha < 1.0):
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")


def fixed_point_residual(g: Graph, pi: np.ndarray, v: np.ndarray, alpha: float) -> float:
    """``|| pi - (alpha P pi + (1 - alpha) v) ||_1``."""
    return float(np.abs(pi - alpha * matvec_P(g, pi) - (1 - alpha) * v).sum())


def pagerank_power(g: Graph, v, cfg: PageRankConfig = PageRankConfig()) -> PageRankResult:
    """Iterate ``x <- alpha P x + (1 - alpha) v`` with L1 renormalisation.

    Stops when the L1 fixed-point residual drops to ``cfg.tol``.
    """
    g.require_no_isolated()
    v = preference_vector(v, g.n)
    alpha = cfg.alpha
    connected = g.is_connected()
    if alpha == 0.0:
        return PageRankResult(v.copy(), 0.0, 0, "power", True, connected)
    x = v.copy()
    resid = np.inf
    for it in range(1, cfg.max_iter + 1):
        y = alpha * matvec_P(g, x) + (1 - alpha) * v
        resid = float(np.abs(y - x).sum())
        x = y / y.sum()
        if resid <= cfg.tol:
            break
    else:
        warnings.warn(f"PageRank power iteration stopped at max_iter={cfg.max_iter}, residual {resid:.3g}")
        return PageRankResult(x, resid, cfg.max_iter, "power", False, connected)
    return PageRankResult(x, resid, it, "power", True, connected)


def dense_P(g: Graph, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    g.require_no_isolated()
    if g.n > dense_limit:
        raise SizeError(f"n={g.n} exceeds dense limit {dense_limit}")
    return g.to_dense() / g.degrees[None, :]


def pagerank_dense(g: Graph, v, alpha: float, dense_limit: int = DENSE_LIMIT) -> PageRankResult:
    """Solve ``(I - alpha P) pi = (1 - alpha) v`` directly."""
    _check_alpha(alpha)
    v = preference_vector(v, g.n)
    p = dense_P(g, dense_limit)
    pi = np.linalg.solve(np.eye(g.n) - alpha * p, (1 - alpha) * v)
    resid = float(np.abs(pi - alpha * p @ pi - (1 - alpha) * v).sum())
    return PageRankResult(pi, resid, 0, "dense", True, g.is_connected())


def pagerank_series(g: Graph, v, alpha: float, k: int) -> tuple[np.ndarray, float]:
    """Partial sum ``(1 - alpha) sum_{t<=k} alpha^t P^t v`` and its L1 tail bound ``alpha^(k+1)``."""
    _check_alpha(alpha)
    if k < 0:
        raise ParameterError("k must be >= 0")
    v = preference_vector(v, g.n)
    term = v.copy()
    total = v.copy()
    for _ in range(k):
        term = alpha * matvec_P(g, term)
        total += term
    return (1 - alpha) * total, alpha ** (k + 1)


def stationary(g: Graph) -> np.ndarray:
    """``d / vol``; warns when the graph is disconnected (the alpha = 1 limit is then not unique)."""
    if g.volume == 0:
        raise StructuralError("graph has no edges")
    if not g.is_connected():
        warnings.warn("graph is disconnected: stationary distribution is not unique")
    return g.degrees / g.volume
