"""Random graph families and their expected-degree vectors.

Every generator samples each unordered pair ``{i, j}`` with ``i < j`` exactly
once, so graphs are simple and loop-free.  The uniform variate for pair
``(i, j)`` is the ``(j - i - 1)``-th output of a Philox stream keyed by
``(seed, i)``.  Because every pair owns a fixed position in a counter-based
stream, the sampled graph depends only on the seed, never on how rows are
split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ParameterError, StructuralError

__all__ = [
    "Graph",
    "WeightSpec",
    "SbmParams",
    "gen_er",
    "gen_chung_lu",
    "gen_sbm",
    "realize_weights",
    "ExpectedAdjacency",
    "expected_adjacency_sbm",
    "expected_adjacency_chung_lu",
]

_SEED_MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Graph container
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph in CSR form.

    ``indptr``/``indices`` hold the sorted neighbour list of every vertex, both
    directions of each edge included.  Arrays are made read-only on
    construction, so instances are safe to share between threads.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray = field(init=False)
    volume: int = field(init=False)

    def __post_init__(self):
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int32 if self.n < 2**31 else np.int64)
        if indptr.shape != (self.n + 1,):
            raise StructuralError(f"indptr must have length n + 1 = {self.n + 1}")
        degrees = np.diff(indptr)
        for arr in (indptr, indices, degrees):
            arr.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "volume", int(degrees.sum()))

    # -- construction -------------------------------------------------------

    @classmethod
    def from_upper(cls, upper: sp.csr_matrix) -> Graph:
        """Build from a strictly upper-triangular 0/1 matrix (one entry per edge)."""
        upper = sp.csr_matrix(upper)
        upper.sum_duplicates()
        full = (upper + upper.T).tocsr()
        full.sort_indices()
        return cls(full.shape[0], full.indptr, full.indices)

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        """Build from an iterable of ``(i, j)`` pairs; orientation and duplicates are ignored."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ParameterError("edges must be a sequence of pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ParameterError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise StructuralError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        upper = sp.csr_matrix((np.ones(len(lo)), (lo, hi)), shape=(n, n))
        upper.data[:] = 1.0
        return cls.from_upper(upper)

    # -- views ---------------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return self.volume // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Adjacency matrix as float64 CSR (shared, do not mutate)."""
        data = np.ones(len(self.indices))
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array with ``i < j``, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        cols = self.indices.astype(np.int64)
        keep = rows < cols
        return np.column_stack([rows[keep], cols[keep]])

    def to_dense(self) -> np.ndarray:
        return self.adjacency.toarray()

    @cached_property
    def _components(self) -> tuple[int, np.ndarray]:
        return connected_components(self.adjacency, directed=False)

    def is_connected(self) -> bool:
        return self.n > 0 and self._components[0] == 1

    def largest_component(self) -> np.ndarray:
        """Sorted vertex indices of the largest connected component."""
        ncomp, labels = self._components
        if ncomp == 1:
            return np.arange(self.n)
        sizes = np.bincount(labels)
        return np.flatnonzero(labels == int(np.argmax(sizes)))

    def subgraph(self, vertices: np.ndarray) -> Graph:
        vertices = np.asarray(vertices)
        sub = self.adjacency[vertices][:, vertices].tocsr()
        sub.sort_indices()
        return Graph(len(vertices), sub.indptr, sub.indices)

    def require_no_isolated(self) -> None:
        if self.n == 0 or self.volume == 0:
            raise StructuralError("graph has no edges")
        if self.degrees.min() == 0:
            i = int(np.argmin(self.degrees))
            raise StructuralError(f"vertex {i} is isolated (degree 0)")

    def check_invariants(self) -> None:
        """Raise StructuralError if symmetry, simplicity or degree bookkeeping fail."""
        a = self.adjacency
        if (a != a.T).nnz:
            raise StructuralError("adjacency is not symmetric")
        if a.diagonal().any():
            raise StructuralError("self-loop present")
        for i in range(self.n):
            nb = self.neighbors(i)
            if nb.size > 1 and np.any(np.diff(nb) <= 0):
                raise StructuralError(f"neighbour list of {i} not strictly increasing")
        if self.volume % 2:
            raise StructuralError("odd volume")

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


# ---------------------------------------------------------------------------
# Parameter types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightSpec:
    """Recipe for an expected-degree vector.

    Use the classmethod constructors; ``params`` holds the variant's fields.
    """

    variant: str
    params: dict = field(default_factory=dict)

    VARIANTS = ("constant", "geometric_clipped", "power_law", "explicit")

    @classmethod
    def constant(cls, w: float) -> WeightSpec:
        return cls("constant", {"w": float(w)})

    @classmethod
    def geometric_clipped(cls, target_mean: float, ratio: float = 7.0) -> WeightSpec:
        return cls("geometric_clipped", {"target_mean": float(target_mean), "ratio": float(ratio)})

    @classmethod
    def power_law(
        cls, beta: float, avg_degree: float, max_degree: float, i0_form: str = "linear"
    ) -> WeightSpec:
        if i0_form not in ("linear", "standard"):
            raise ParameterError(f"unknown i0_form {i0_form!r}")
        return cls(
            "power_law",
            {"beta": float(beta), "avg_degree": float(avg_degree),
             "max_degree": float(max_degree), "i0_form": i0_form},
        )

    @classmethod
    def explicit(cls, vector: Sequence[float]) -> WeightSpec:
        return cls("explicit", {"vector": tuple(float(x) for x in vector)})


@dataclass(frozen=True)
class SbmParams:
    """Two-community block model: ``C1 = {0..m-1}``, ``C2 = {m..n-1}``."""

    m: int
    n: int
    p: float
    q: float
    allow_q_above_p: bool = False

    def __post_init__(self):
        if not (1 <= self.m <= self.n - 1):
            raise ParameterError(f"need 1 <= m <= n-1, got m={self.m}, n={self.n}")
        for name in ("p", "q"):
            val = getattr(self, name)
            if not (0.0 <= val <= 1.0):
                raise ParameterError(f"{name}={val} is not a probability")
        if self.q > self.p and not self.allow_q_above_p:
            raise ParameterError(f"q={self.q} > p={self.p}; pass allow_q_above_p=True to permit it")

    @property
    def community_degrees(self) -> tuple[float, float]:
        """Expected degrees of C1 and C2 under the diagonal-p convention."""
        m, n, p, q = self.m, self.n, self.p, self.q
        return m * p + (n - m) * q, m * q + (n - m) * p

    @property
    def w_max(self) -> float:
        return max(self.community_degrees)

    @property
    def w_min(self) -> float:
        return min(self.community_degrees)

    @property
    def beta(self) -> float:
        return (self.p - self.q) / (self.p + self.q)

    def expected_degrees(self) -> np.ndarray:
        t1, t2 = self.community_degrees
        w = np.full(self.n, t2)
        w[: self.m] = t1
        return w


# ---------------------------------------------------------------------------
# Pair sampling
# ---------------------------------------------------------------------------


def _check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0:
        seed &= _SEED_MASK
    if seed > _SEED_MASK:
        raise ParameterError("seed must fit in 64 bits")
    return seed


def _row_uniforms(seed: int, i: int, count: int) -> np.ndarray:
    bitgen = np.random.Philox(key=np.array([seed, i], dtype=np.uint64))
    return np.random.Generator(bitgen).random(count)


def _sample_rows(n: int, seed: int, row_prob: Callable[[int], object], lo: int, hi: int):
    cols = []
    for i in range(lo, hi):
        count = n - i - 1
        if count <= 0:
            cols.append(np.empty(0, dtype=np.int64))
            continue
        u = _row_uniforms(seed, i, count)
        cols.append(np.flatnonzero(u < row_prob(i)) + (i + 1))
    return cols


def _sample_pairs(n: int, seed, row_prob: Callable[[int], object], threads: int = 1) -> Graph:
    """Sample every pair i<j with probability ``row_prob(i)[j - i - 1]``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    seed = _check_seed(seed)
    threads = max(1, int(threads))
    if threads == 1 or n < 256:
        cols = _sample_rows(n, seed, row_prob, 0, n)
    else:
        bounds = np.linspace(0, n, 4 * threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            parts = pool.map(
                lambda ab: _sample_rows(n, seed, row_prob, ab[0], ab[1]),
                zip(bounds[:-1], bounds[1:]),
            )
            cols = [c for part in parts for c in part]
    counts = np.fromiter((len(c) for c in cols), dtype=np.int64, count=n)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    indices = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    upper = sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    return Graph.from_upper(upper)


def _check_prob(p, name="p"):
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ParameterError(f"{name}={p} is not a probability")


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def gen_er(n: int, p: float, seed, threads: int = 1) -> Graph:
    """Erdős–Rényi G(n, p)."""
    _check_prob(p)
    p = float(p)
    return _sample_pairs(n, seed, lambda i: p, threads)


def gen_chung_lu(w, seed, n: int | None = None, threads: int = 1) -> Graph:
    """Chung-Lu graph with ``p_ij = w_i w_j / sum(w)``.

    ``w`` is a WeightSpec (``n`` required unless explicit) or a weight vector.
    """
    if isinstance(w, WeightSpec):
        if n is None:
            if w.variant != "explicit":
                raise ParameterError("n is required for non-explicit weight specs")
            n = len(w.params["vector"])
        weights = realize_weights(w, n, seed=seed)
    else:
        weights = np.asarray(w, dtype=float)
    check_feasible(weights)
    total = float(weights.sum())
    return _sample_pairs(len(weights), seed, lambda i: weights[i] * weights[i + 1 :] / total, threads)


def gen_sbm(params: SbmParams, seed, threads: int = 1) -> Graph:
    m, n, p, q = params.m, params.n, params.p, params.q

    def row_prob(i):
        j = np.arange(i + 1, n)
        same = (j < m) == (i < m)
        return np.where(same, p, q)

    return _sample_pairs(n, seed, row_prob, threads)


# ---------------------------------------------------------------------------
# Weight vectors
# ---------------------------------------------------------------------------


def check_feasible(w: np.ndarray) -> None:
    """Raise ParameterError unless all weights are positive and max(w)^2 <= sum(w)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError("weight vector must be a non-empty 1-d array")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        bad = int(np.flatnonzero(~(np.isfinite(w) & (w > 0)))[0])
        raise ParameterError(f"weight at index {bad} is not positive: {w[bad]}")
    total = w.sum()
    k = int(np.argmax(w))
    if w[k] ** 2 > total:
        raise ParameterError(
            f"infeasible weights: w[{k}]^2 = {w[k] ** 2:.6g} exceeds sum(w) = {total:.6g}"
        )


def power_law_offset(n: int, beta: float, avg_degree: float, max_degree: float, form: str) -> float:
    if form == "linear":
        return n * (avg_degree * (beta - 1)) / (max_degree * (beta - 2))
    if form == "standard":
        return n * (avg_degree * (beta - 2) / (max_degree * (beta - 1))) ** (beta - 1)
    raise ParameterError(f"unknown i0 form {form!r}")


def _clip_to_mean(raw: np.ndarray, target: float, ratio: float) -> np.ndarray:
    # mean(clip(raw, L, ratio*L)) is continuous and nondecreasing in L
    lo, hi = 0.0, float(target)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.clip(raw, mid, ratio * mid).mean() < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * target:
            break
    low = 0.5 * (lo + hi)
    return np.clip(raw, low, ratio * low)


def realize_weights(spec: WeightSpec, n: int, seed=0) -> np.ndarray:
    """Materialise ``spec`` as a positive weight vector of length ``n``.

    ``seed`` is only consumed by the geometric variant.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    v, prm = spec.variant, spec.params
    if v == "constant":
        if prm["w"] <= 0:
            raise ParameterError("constant weight must be positive")
        return np.full(n, prm["w"])
    if v == "explicit":
        w = np.array(prm["vector"], dtype=float)
        if len(w) != n:
            raise ParameterError(f"explicit vector has length {len(w)}, expected {n}")
        return w
    if v == "geometric_clipped":
        target, ratio = prm["target_mean"], prm["ratio"]
        if target < 1 or ratio < 1:
            raise ParameterError("geometric_clipped needs target_mean >= 1 and ratio >= 1")
        rng = np.random.default_rng([_check_seed(seed), 0x9E0])
        raw = rng.geometric(1.0 / target, size=n).astype(float)
        raw *= target / raw.mean()
        w = _clip_to_mean(raw, target, ratio)
        if abs(w.mean() - target) > 0.01 * target:
            raise ParameterError(f"cannot reach mean {target} under ratio-{ratio} clipping")
        return w
    if v == "power_law":
        beta, d, m = prm["beta"], prm["avg_degree"], prm["max_degree"]
        if beta <= 2:
            raise ParameterError(f"power-law exponent must exceed 2, got {beta}")
        c = (beta - 2) / (beta - 1) * d * n ** (1 / (beta - 1))
        i0 = power_law_offset(n, beta, d, m, prm["i0_form"])
        idx = np.arange(1, n + 1, dtype=float)
        return c * (i0 + idx) ** (-1 / (beta - 1))
    raise ParameterError(f"unknown weight variant {v!r}")


# ---------------------------------------------------------------------------
# Expected adjacency operators
# ---------------------------------------------------------------------------


class ExpectedAdjacency:
    """Matrix-free ``E(A)`` with the diagonal kept (diag_i = P(i~i) by formula).

    Subclasses provide ``matvec`` in O(n) and ``expected_degrees``.
    """

    n: int

    def matvec(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def diagonal(self) -> np.ndarray:
        raise NotImplementedError

    def expected_degrees(self) -> np.ndarray:
        return self.matvec(np.ones(self.n))

    def dense(self) -> np.ndarray:
        return np.column_stack([self.matvec(e) for e in np.eye(self.n)])


class SbmExpectation(ExpectedAdjacency):
    def __init__(self, params: SbmParams):
        self.params = params
        self.n = params.n

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        m, p, q = self.params.m, self.params.p, self.params.q
        s1, s2 = x[:m].sum(), x[m:].sum()
        out = np.empty_like(x)
        out[:m] = p * s1 + q * s2
        out[m:] = q * s1 + p * s2
        return out

    def diagonal(self):
        return np.full(self.n, self.params.p)

    def expected_degrees(self):
        return self.params.expected_degrees()


class ChungLuExpectation(ExpectedAdjacency):
    """Rank-one ``w w^T / sum(w)``; constant weights ``n p`` give Erdős–Rényi."""

    def __init__(self, w):
        self.w = np.asarray(w, dtype=float)
        self.n = len(self.w)
        self.total = float(self.w.sum())

    def matvec(self, x):
        return self.w * (self.w @ np.asarray(x, dtype=float)) / self.total

    def diagonal(self):
        return self.w**2 / self.total

    def expected_degrees(self):
        return self.w.copy()


def expected_adjacency_sbm(params: SbmParams) -> SbmExpectation:
    return SbmExpectation(params)


def expected_adjacency_chung_lu(w) -> ChungLuExpectation:
    return ChungLuExpectation(w)
