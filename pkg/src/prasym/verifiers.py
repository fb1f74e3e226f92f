"""Measured lemma-level quantities against their bounds.

Each check returns a ``BoundCheck``: the measured statistic, the bound it
must not exceed, and the constant the bound was built with.  Rates come from
the proofs (``sqrt(log n / w_min)`` and friends); the constants are
configuration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ParameterError
from .graphs import ExpectedAdjacency, Graph, SbmParams, expected_adjacency_sbm
from .pagerank import preference_vector
from .spectral import (
    DENSE_LIMIT,
    dense_Q,
    matvec_Q,
    perron_vector,
    second_eigenvalue_magnitude,
    spectral_norm_sym,
)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float
    constant_used: float
    n: int
    seed: int | None = None
    flags: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.bound)

    def row(self) -> dict:
        return {
            "check": self.name,
            "n": self.n,
            "seed": self.seed,
            "measured": self.measured,
            "bound": self.bound,
            "constant": self.constant_used,
            "passed": self.passed,
            "flags": ";".join(self.flags),
        }


def check_degree_concentration(g: Graph, w, C: float = 4.0, seed=None, name="degree_concentration") -> BoundCheck:
    """``max_i |d_i / w_i - 1|`` against ``C sqrt(log n / w_min)``."""
    w = np.asarray(w, dtype=float)
    if len(w) != g.n:
        raise ParameterError("weight vector length differs from n")
    if np.any(w <= 0):
        raise ParameterError("expected degrees must be positive")
    measured = float(np.max(np.abs(g.degrees / w - 1.0)))
    bound = C * math.sqrt(math.log(g.n) / w.min()) if g.n > 1 else 0.0
    flags = ("uninformative",) if bound >= 1.0 else ()
    return BoundCheck(name, measured, bound, C, g.n, seed, flags)


def check_degree_ratio(g: Graph, K: float, seed=None) -> BoundCheck:
    g.require_no_isolated()
    measured = float(g.degrees.max() / g.degrees.min())
    return BoundCheck("degree_ratio", measured, float(K), float(K), g.n, seed)


def check_spectral_expansion(g: Graph, threshold: float, seed=None, method="power", tol=1e-8, max_iter=10_000) -> BoundCheck:
    est = second_eigenvalue_magnitude(g, tol=tol, max_iter=max_iter, seed=0 if seed is None else seed, method=method)
    flags = () if est.converged else ("nonconverged",)
    return BoundCheck("spectral_expansion", est.value, float(threshold), float(threshold), g.n, seed, flags)


def check_adjacency_norm(
    g: Graph,
    expectation,
    K: float = 3.0,
    seed=None,
    zero_diagonal: bool = False,
    tol=1e-6,
    max_iter=5000,
    method="power",
) -> BoundCheck:
    """``||A - E(A)||_2`` against ``K sqrt(log n * w_max)``.

    ``expectation`` is SbmParams or any ExpectedAdjacency.  By default E(A)
    keeps its diagonal, so a loop-free sample differs from it by ``-diag``;
    ``zero_diagonal=True`` removes that discrepancy.
    """
    ea = _expectation(expectation)
    diag = ea.diagonal() if zero_diagonal else 0.0

    def op(x):
        return g.adjacency @ x - ea.matvec(x) + diag * x

    est = spectral_norm_sym(op, g.n, tol=tol, max_iter=max_iter, seed=0 if seed is None else seed, method=method)
    if not est.converged:
        raise ConvergenceError("spectral norm estimate did not converge")
    w_max = float(ea.expected_degrees().max())
    bound = K * math.sqrt(math.log(g.n) * w_max)
    return BoundCheck("adjacency_norm", est.value, bound, K, g.n, seed)


def q_difference_operator(g: Graph, expectation):
    """``x -> Qx - Qbar x`` with ``Qbar = W^-1/2 E(A) W^-1/2``."""
    ea = _expectation(expectation)
    ws = 1.0 / np.sqrt(ea.expected_degrees())

    def op(x):
        return matvec_Q(g, x) - ws * ea.matvec(ws * x)

    return op


def check_q_norm(
    g: Graph, expectation, C: float = 4.0, seed=None, tol=1e-6, max_iter=5000, method="power"
) -> BoundCheck:
    """``||Q - Qbar||_2`` against ``C sqrt(log n * w_max) / w_min``."""
    g.require_no_isolated()
    ea = _expectation(expectation)
    est = spectral_norm_sym(
        q_difference_operator(g, ea), g.n, tol=tol, max_iter=max_iter,
        seed=0 if seed is None else seed, method=method,
    )
    if not est.converged:
        raise ConvergenceError("spectral norm estimate did not converge")
    w = ea.expected_degrees()
    bound = C * math.sqrt(math.log(g.n) * w.max()) / w.min()
    return BoundCheck("q_norm", est.value, bound, C, g.n, seed)


def qtilde_vprime(g: Graph, v) -> np.ndarray:
    """``(Q - u1 u1^T) v'`` with ``v' = n D^-1/2 v``."""
    v = preference_vector(v, g.n)
    vprime = g.n * v / np.sqrt(g.degrees)
    u1 = perron_vector(g)
    return matvec_Q(g, vprime) - u1 * (u1 @ vprime)


def check_qtilde_vprime(g: Graph, v, w_min: float, ratio_threshold: float = 0.2, seed=None) -> BoundCheck:
    """``||Q~ v'||_inf`` against ``ratio_threshold / sqrt(w_min)``."""
    g.require_no_isolated()
    measured = float(np.max(np.abs(qtilde_vprime(g, v))))
    bound = ratio_threshold / math.sqrt(w_min)
    return BoundCheck("qtilde_vprime", measured, bound, ratio_threshold, g.n, seed)


def s_column(g: Graph, alpha: float, i: int, tol: float = 1e-14) -> np.ndarray:
    """Column i of ``S = (I - alpha Q)^-1`` (equal to row i by symmetry).

    The Perron component is inverted exactly (``1 / (1 - alpha)``); the rest is
    a Neumann series in ``alpha Q~``, which contracts at ``alpha |lambda_2|``.
    """
    u1 = perron_vector(g)
    x = -u1 * u1[i]
    x[i] += 1.0
    total = x.copy()
    term = x
    for _ in range(100_000):
        term = alpha * matvec_Q(g, term)
        term -= u1 * (u1 @ term)
        total += term
        if np.abs(term).sum() <= tol * np.abs(total).sum():
            break
    return total + u1 * (u1[i] / (1 - alpha))


def s_columns(g: Graph, alpha: float, rows, tol: float = 1e-14) -> np.ndarray:
    """Several columns of S at once; same recursion as ``s_column`` on an n x k block."""
    rows = np.asarray(rows, dtype=np.intp)
    u1 = perron_vector(g)
    s = 1.0 / np.sqrt(g.degrees)
    x = -np.outer(u1, u1[rows])
    x[rows, np.arange(len(rows))] += 1.0
    total = x.copy()
    term = x
    for _ in range(100_000):
        term = alpha * (s[:, None] * (g.adjacency @ (s[:, None] * term)))
        term -= np.outer(u1, u1 @ term)
        total += term
        if np.all(np.abs(term).sum(axis=0) <= tol * np.abs(total).sum(axis=0)):
            break
    return total + np.outer(u1, u1[rows] / (1 - alpha))


def check_s_infty_norm(
    g: Graph, alpha: float, sample_rows: int = 64, seed=None, dense_limit: int = DENSE_LIMIT
) -> BoundCheck:
    """``||S||_inf`` against ``sqrt(d_max / d_min) / (1 - alpha)``.

    Exact for ``n <= dense_limit``; above it the maximum over sampled rows is
    reported (a lower bound, flagged ``sampled``).
    """
    if not (0.0 <= alpha < 1.0):
        raise ParameterError("alpha must lie in [0, 1)")
    g.require_no_isolated()
    bound = math.sqrt(g.degrees.max() / g.degrees.min()) / (1 - alpha)
    if g.n <= dense_limit:
        s = np.linalg.solve(np.eye(g.n) - alpha * dense_Q(g), np.eye(g.n))
        measured = float(np.abs(s).sum(axis=1).max())
        flags: tuple[str, ...] = ()
    else:
        rng = np.random.default_rng(0 if seed is None else seed)
        # always include the extreme-degree rows, where the row norm peaks
        rows = {int(np.argmax(g.degrees)), int(np.argmin(g.degrees))}
        rows.update(int(r) for r in rng.choice(g.n, size=min(sample_rows, g.n), replace=False))
        cols = s_columns(g, alpha, sorted(rows))
        measured = float(np.abs(cols).sum(axis=0).max())
        flags = ("sampled", "lower_bound")
    return BoundCheck("s_infty_norm", measured, bound, 1.0 / (1 - alpha), g.n, seed, flags)


def bernstein_tail(B2: float, b: float, eps: float) -> float:
    """``2 exp(-eps^2 / (2 (B2 + b eps / 3)))``."""
    if B2 < 0 or b <= 0 or eps <= 0:
        raise ParameterError("need B2 >= 0, b > 0, eps > 0")
    return 2.0 * math.exp(-(eps**2) / (2.0 * (B2 + b * eps / 3.0)))


def bernstein_deviation(B2: float, b: float, delta: float) -> float:
    """Smallest ``eps`` with ``bernstein_tail(B2, b, eps) <= delta``."""
    if not (0 < delta < 2):
        raise ParameterError("delta must lie in (0, 2)")
    L = math.log(2.0 / delta)
    # eps^2 = 2 L (B2 + b eps / 3)  ->  quadratic in eps
    a1 = 2.0 * L * b / 3.0
    return 0.5 * (a1 + math.sqrt(a1 * a1 + 8.0 * L * B2))


def matrix_bernstein_tail(sigma2: float, R: float, t: float, d1: int, d2: int) -> float:
    """``(d1 + d2) exp(-(t^2 / 2) / (sigma2 + R t / 3))``."""
    if min(sigma2, R, t, d1, d2) < 0:
        raise ParameterError("all arguments must be nonnegative")
    if t == 0:
        return float(d1 + d2)
    denom = sigma2 + R * t / 3.0
    if denom == 0:
        return 0.0
    return (d1 + d2) * math.exp(-(t * t / 2.0) / denom)


def error_bound_chain(g: Graph, v, alpha: float) -> tuple[float, float]:
    """Both sides of ``||eps||_1/(1-alpha) <= sqrt(dmax/dmin) sqrt(n) max|a l/(1-a l)| ||v||_2``.

    Dense regime only.
    """
    from .asymptotics import approx_mixture
    from .pagerank import pagerank_dense
    from .spectral import dense_spectrum

    v = preference_vector(v, g.n)
    pi = pagerank_dense(g, v, alpha).pi
    eps = pi - approx_mixture(g, v, alpha)
    lhs = float(np.abs(eps).sum()) / (1 - alpha)
    vals, _ = dense_spectrum(g)
    rest = vals[1:]
    factor = float(np.max(np.abs(alpha * rest / (1 - alpha * rest)))) if len(rest) else 0.0
    rhs = math.sqrt(g.degrees.max() / g.degrees.min()) * math.sqrt(g.n) * factor * float(np.linalg.norm(v))
    return lhs, rhs


def _expectation(expectation) -> ExpectedAdjacency:
    if isinstance(expectation, SbmParams):
        return expected_adjacency_sbm(expectation)
    if isinstance(expectation, ExpectedAdjacency):
        return expectation
    raise ParameterError("expectation must be SbmParams or an ExpectedAdjacency")


def pass_rate(checks) -> float:
    checks = list(checks)
    if not checks:
        raise ParameterError("no checks")
    return sum(c.passed for c in checks) / len(checks)


def sweep_passes(checks, threshold: float = 0.9) -> bool:
    """True when at least ``threshold`` of seeds pass at every n."""
    by_n: dict[int, list[BoundCheck]] = {}
    for c in checks:
        by_n.setdefault(c.n, []).append(c)
    return all(pass_rate(cs) >= threshold for cs in by_n.values())
