"""Error functionals between probability vectors.

Sums go through ``np.sum``, which accumulates pairwise.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ErrorReport:
    tv: float
    l1: float
    l2: float
    linf: float
    max_relative: float
    weak_gap: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _pair(a, b, relaxed: bool):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError(f"length mismatch: {a.shape} vs {b.shape}")
    if not relaxed:
        for name, x in (("first", a), ("second", b)):
            if np.any(x < 0) or abs(x.sum() - 1.0) > 1e-9:
                raise ParameterError(f"{name} argument is not a probability vector")
    return a, b


def tv_distance(a, b, relaxed: bool = False) -> float:
    a, b = _pair(a, b, relaxed)
    return 0.5 * float(np.abs(a - b).sum())


def max_relative_error(pi, pibar, relaxed: bool = False) -> float:
    """``max_i |pi_i - pibar_i| / pibar_i``."""
    pi, pibar = _pair(pi, pibar, relaxed)
    if np.any(pibar == 0):
        i = int(np.flatnonzero(pibar == 0)[0])
        raise ParameterError(f"reference entry {i} is zero; relative error undefined")
    return float(np.max(np.abs(pi - pibar) / pibar))


def weak_convergence_gap(pi, pibar, f, relaxed: bool = False) -> float:
    """``|sum f pi - sum f pibar|`` for a test function with ``max |f| <= 1``."""
    pi, pibar = _pair(pi, pibar, relaxed)
    f = np.asarray(f, dtype=float)
    if f.shape != pi.shape:
        raise ParameterError("test function has the wrong length")
    if np.max(np.abs(f)) > 1.0:
        raise ParameterError("test function must satisfy max |f| <= 1")
    return abs(float(np.sum(f * (pi - pibar))))


def norms(x) -> tuple[float, float, float]:
    x = np.abs(np.asarray(x, dtype=float))
    if x.size == 0:
        return 0.0, 0.0, 0.0
    linf = float(x.max())
    if linf == 0.0:
        return 0.0, 0.0, 0.0
    # scale by the max entry so squares neither underflow nor overflow
    return float(x.sum()), linf * float(np.sqrt(np.sum((x / linf) ** 2))), linf


def error_report(pi, pibar, f=None) -> ErrorReport:
    l1, l2, linf = norms(np.asarray(pi) - np.asarray(pibar))
    return ErrorReport(
        tv=0.5 * l1,
        l1=l1,
        l2=l2,
        linf=linf,
        max_relative=max_relative_error(pi, pibar),
        weak_gap=None if f is None else weak_convergence_gap(pi, pibar, f),
    )
