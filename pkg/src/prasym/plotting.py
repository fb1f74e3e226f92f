"""Log-log sweep plots as standalone SVG, plus a gnuplot-readable .dat file."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ParameterError

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=30, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass(frozen=True)
class PlotResult:
    path: Path
    dat_path: Path
    slopes: dict
    skipped: int


def _series(records, x: str, y: str):
    """Group positive (x, y) pairs by model; return them and the skip count."""
    groups: dict[str, list[tuple[float, float]]] = {}
    skipped = 0
    for r in records:
        if getattr(r, "excluded", False):
            continue
        xv, yv = float(getattr(r, x)), float(getattr(r, y))
        if not (xv > 0 and yv > 0 and math.isfinite(xv) and math.isfinite(yv)):
            skipped += 1
            continue
        groups.setdefault(r.model, []).append((xv, yv))
    return groups, skipped


def medians(points):
    xs = sorted({p[0] for p in points})
    return xs, [float(np.median([p[1] for p in points if p[0] == xv])) for xv in xs]


def fitted_slope(xs, ys) -> float:
    """Least-squares slope in log-log coordinates."""
    if len(xs) < 2:
        return float("nan")
    lx = np.log10(np.asarray(xs, dtype=float))
    ly = np.log10(np.asarray(ys, dtype=float))
    lx = lx - lx.mean()
    return float(lx @ (ly - ly.mean()) / (lx @ lx))


def _ticks(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def _range(values):
    lo, hi = math.log10(min(values)), math.log10(max(values))
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def emit_loglog_plot(records, x: str = "n", y: str = "tv_error", path="plot.svg", title: str | None = None) -> PlotResult:
    """Per-seed scatter (faint), per-n medians joined by a line, slope in the legend.

    Records with a nonpositive or missing ``y`` cannot go on a log axis; they
    are dropped and counted in ``PlotResult.skipped``.
    """
    records = list(records)
    groups, skipped = _series(records, x, y)
    if skipped:
        logger.warning("skipped %d record(s) with nonpositive %s", skipped, y)
    if not groups:
        raise ParameterError(f"no positive {y} values to plot")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    all_pts = [p for pts in groups.values() for p in pts]
    x0, x1 = _range([p[0] for p in all_pts])
    y0, y1 = _range([p[1] for p in all_pts])
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (math.log10(v) - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (1 - (math.log10(v) - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    # decade ticks; fall back to the data range when it spans under one decade
    xt = [t for t in _ticks(x0, x1) if x0 <= t <= x1] or [round(0.5 * (x0 + x1), 2)]
    yt = [t for t in _ticks(y0, y1) if y0 <= t <= y1] or [round(0.5 * (y0 + y1), 2)]
    for t in xt:
        X = px(10**t)
        out.append(f'<line x1="{X:.1f}" y1="{MARGIN["top"] + ph}" x2="{X:.1f}" y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.1f}" y="{MARGIN["top"] + ph + 20}" text-anchor="middle">10^{t:g}</text>')
    for t in yt:
        Y = py(10**t)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{Y:.1f}" x2="{MARGIN["left"]}" y2="{Y:.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{Y + 4:.1f}" text-anchor="end">10^{t:g}</text>')
    out.append(
        f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 15}" text-anchor="middle">log10 {escape(x)}</text>'
    )
    out.append(
        f'<text transform="translate(20,{MARGIN["top"] + ph / 2}) rotate(-90)" text-anchor="middle">log10 {escape(y)}</text>'
    )
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')

    slopes = {}
    dat_lines = [f"# {x} {y} median_{y} model"]
    for k, (model, pts) in enumerate(sorted(groups.items())):
        color = COLORS[k % len(COLORS)]
        for xv, yv in pts:
            out.append(f'<circle cx="{px(xv):.2f}" cy="{py(yv):.2f}" r="2.5" fill="{color}" fill-opacity="0.3"/>')
        mx, my = medians(pts)
        slope = fitted_slope(mx, my)
        slopes[model] = slope
        if len(mx) > 1:
            coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(mx, my))
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in zip(mx, my):
            out.append(
                f'<rect x="{px(a) - 4:.2f}" y="{py(b) - 4:.2f}" width="8" height="8" fill="{color}" stroke="black" stroke-width="0.5"/>'
            )
        ly = MARGIN["top"] + 16 + 18 * k
        lx = MARGIN["left"] + pw - 190
        out.append(f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{lx + 16}" y="{ly}">{escape(model)} median, slope {slope:.3f}</text>')
        for xv, yv in sorted(pts):
            med = my[mx.index(xv)]
            dat_lines.append(f"{xv:.17g} {yv:.17g} {med:.17g} {model}")
    if skipped:
        out.append(
            f'<text x="{MARGIN["left"] + 6}" y="{MARGIN["top"] + ph - 6}" fill="gray">{skipped} nonpositive value(s) skipped</text>'
        )
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    dat_path = path.with_suffix(".dat")
    dat_path.write_text("\n".join(dat_lines) + "\n")
    return PlotResult(path, dat_path, slopes, skipped)
