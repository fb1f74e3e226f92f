"""Matrix-free P and Q operators and spectral estimates.

``P = A D^-1`` (column stochastic) and ``Q = D^-1/2 A D^-1/2`` (symmetric,
same spectrum).  The second-eigenvalue estimate deflates the Perron vector
explicitly and runs power iteration on ``Q - u1 u1^T``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .errors import SizeError, StructuralError
from .graphs import Graph

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2048


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    residual: float
    iterations: int
    converged: bool
    method: str = "power"


def _check_degrees(g: Graph) -> None:
    g.require_no_isolated()


def matvec_P(g: Graph, x: np.ndarray) -> np.ndarray:
    _check_degrees(g)
    return g.adjacency @ (np.asarray(x, dtype=float) / g.degrees)


def matvec_Q(g: Graph, x: np.ndarray) -> np.ndarray:
    _check_degrees(g)
    s = 1.0 / np.sqrt(g.degrees)
    return s * (g.adjacency @ (s * np.asarray(x, dtype=float)))


def perron_vector(g: Graph) -> np.ndarray:
    """``D^1/2 1 / sqrt(vol)``."""
    if g.volume == 0:
        raise StructuralError("graph has no edges")
    return np.sqrt(g.degrees / g.volume)


def deflated_Q(g: Graph) -> Callable[[np.ndarray], np.ndarray]:
    """``x -> Qx - u1 (u1^T x)``, the restriction of Q to the complement of u1."""
    u1 = perron_vector(g)

    def op(x):
        y = matvec_Q(g, x)
        return y - u1 * (u1 @ x)

    return op


def _start_vector(n: int, seed) -> np.ndarray:
    x = np.random.default_rng(seed).standard_normal(n)
    return x / np.linalg.norm(x)


def second_eigenvalue_magnitude(
    g: Graph, tol: float = 1e-8, max_iter: int = 10_000, seed=0, method: str = "power"
) -> SpectralEstimate:
    """Estimate ``max(|lambda_2|, |lambda_n|)`` of Q.

    ``method="power"`` is deflated power iteration with a residual
    certificate; ``method="lanczos"`` hands the same deflated operator to
    ARPACK, which is much faster when the top of the spectrum is a continuum
    (dense random graphs).
    """
    _check_degrees(g)
    if g.n == 1:
        return SpectralEstimate(0.0, 0.0, 0, True, method)
    u1 = perron_vector(g)
    op = deflated_Q(g)
    if method == "lanczos":
        est = _lanczos_magnitude(g.n, op, u1, tol, max_iter, seed)
        return SpectralEstimate(min(est.value, 1.0), est.residual, est.iterations, est.converged, est.method)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    return _deflated_power(g.n, op, u1, tol, max_iter, seed)


def _deflated_power(n, op, u1, tol, max_iter, seed) -> SpectralEstimate:
    x = _start_vector(n, seed)
    x -= u1 * (u1 @ x)
    nx = np.linalg.norm(x)
    if nx == 0:
        return SpectralEstimate(0.0, 0.0, 0, True)
    x /= nx

    squared = False
    converged = False
    history: list[float] = []
    signs: list[float] = []
    theta = resid = 0.0
    it = 0
    while it < max_iter:
        it += 1
        y = op(x)
        if squared:
            y = op(y)
        y -= u1 * (u1 @ y)  # re-orthogonalise against drift
        theta = float(x @ y)
        resid = float(np.linalg.norm(y - theta * x))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return SpectralEstimate(0.0, 0.0, it, True)
        if not squared:
            signs.append(np.sign(theta))
            flips = sum(a != b for a, b in zip(signs[-10:-1], signs[-9:]))
            # a Rayleigh quotient far below ||Q~x|| or repeated sign flips
            # means +lambda and -lambda compete: iterate on Q~^2 instead
            if it >= 20 and (abs(theta) < 0.5 * ny or flips >= 3):
                logger.debug("sign oscillation at iteration %d, switching to squared operator", it)
                squared = True
                history.clear()
                x = y / ny
                continue
        history.append(theta)
        x = y / ny
        if len(history) >= 6:
            recent = history[-6:]
            scale = max(abs(recent[-1]), np.finfo(float).tiny)
            stable = all(abs(a - b) <= tol * scale for a, b in zip(recent[:-1], recent[1:]))
            # on Q~^2 a residual r maps to about r / (2 sqrt(theta)) on Q~
            resid_eff = resid / (2 * np.sqrt(abs(theta))) if squared and theta > 0 else resid
            if stable and resid_eff <= tol:
                converged = True
                break
    if squared:
        value = float(np.sqrt(max(theta, 0.0)))
        # residual of the squared problem maps to roughly resid / (2 value)
        resid_eff = resid / (2 * value) if value > 0 else resid
        return SpectralEstimate(min(value, 1.0), resid_eff, it, bool(converged), "power-squared")
    return SpectralEstimate(min(abs(theta), 1.0), resid, it, bool(converged))


def _lanczos_magnitude(n, op, u1, tol, max_iter, seed) -> SpectralEstimate:
    if n <= 3:
        dense = np.column_stack([op(e) for e in np.eye(n)])
        vals = np.linalg.eigvalsh(0.5 * (dense + dense.T))
        return SpectralEstimate(float(np.max(np.abs(vals))), 0.0, 0, True, "lanczos")
    lin = spla.LinearOperator((n, n), matvec=op, dtype=float)
    v0 = _start_vector(n, seed)
    v0 -= u1 * (u1 @ v0)
    try:
        vals, vecs = spla.eigsh(lin, k=1, which="LM", tol=tol, maxiter=max_iter, v0=v0)
    except spla.ArpackNoConvergence as exc:
        if len(exc.eigenvalues):
            lam = float(exc.eigenvalues[0])
            vec = exc.eigenvectors[:, 0]
            resid = float(np.linalg.norm(op(vec) - lam * vec))
            return SpectralEstimate(abs(lam), resid, max_iter, False, "lanczos")
        return SpectralEstimate(float("nan"), float("inf"), max_iter, False, "lanczos")
    lam = float(vals[0])
    vec = vecs[:, 0]
    resid = float(np.linalg.norm(op(vec) - lam * vec))
    return SpectralEstimate(abs(lam), resid, 0, resid <= tol * max(abs(lam), 1.0), "lanczos")


def spectral_norm_sym(
    op: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    seed=0,
    method: str = "power",
) -> SpectralEstimate:
    """Largest ``|eigenvalue|`` of a symmetric operator given by its action.

    Power iteration runs on ``op^2`` so that ``+lambda``/``-lambda`` ties do
    not stall, and returns ``sqrt`` of the converged Rayleigh quotient.
    ``method="lanczos"`` uses ARPACK instead.
    """
    if method == "lanczos":
        return _lanczos_magnitude(n, op, np.zeros(n), tol, max_iter, seed)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    x = _start_vector(n, seed)
    prev = None
    theta = resid = 0.0
    for it in range(1, max_iter + 1):
        y = op(x)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return SpectralEstimate(0.0, 0.0, it, True)
        z = op(y)
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            return SpectralEstimate(0.0, 0.0, it, True)
        theta = float(x @ z)  # = ||op x||^2
        resid = float(np.linalg.norm(z - theta * x))
        x = z / nz
        if prev is not None and abs(theta - prev) <= tol * theta and resid / (2 * np.sqrt(theta)) <= tol * max(np.sqrt(theta), 1.0):
            value = np.sqrt(theta)
            return SpectralEstimate(float(value), resid / (2 * value), it, True)
        prev = theta
    value = np.sqrt(max(theta, 0.0))
    return SpectralEstimate(float(value), resid / (2 * value) if value else resid, max_iter, False)


def dense_Q(g: Graph) -> np.ndarray:
    _check_degrees(g)
    if g.n > DENSE_LIMIT:
        raise SizeError(f"n={g.n} exceeds dense limit {DENSE_LIMIT}")
    s = 1.0 / np.sqrt(g.degrees)
    return s[:, None] * g.to_dense() * s[None, :]


def dense_spectrum(g: Graph, dense_limit: int = DENSE_LIMIT) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of Q in descending order with orthonormal eigenvectors as columns."""
    if g.n > dense_limit:
        raise SizeError(f"n={g.n} exceeds dense limit {dense_limit}")
    q = dense_Q(g)
    vals, vecs = scipy.linalg.eigh(q)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def second_magnitude_dense(g: Graph) -> float:
    vals, _ = dense_spectrum(g)
    return float(max(abs(vals[1]), abs(vals[-1]))) if g.n > 1 else 0.0
