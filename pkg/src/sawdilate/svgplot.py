"""Minimal SVG line plots: polyline overlays, axes, ticks, legend.

Deliberately dependency-free; figures are post-hoc outputs of CSV data and
do not need a plotting stack.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:.4g}"


def svg_plot(path, series: Sequence[dict], *, title: str = "", xlabel: str = "",
             ylabel: str = "", width: int = 720, height: int = 480) -> None:
    """Write a standalone SVG overlaying the given line series.

    Each series is a dict with keys ``name``, ``x``, ``y`` and optionally
    ``dash`` (bool) and ``color``.
    """
    ml, mr, mt, mb = 64, 16, 34, 48
    pw, ph = width - ml - mr, height - mt - mb

    xs = np.concatenate([np.asarray(s["x"], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], dtype=float) for s in series])
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.03 * (y1 - y0)
    y0 -= pad
    y1 += pad

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        lines.append(f'<text x="{width / 2}" y="20" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for t in _ticks(x0, x1):
        if x0 <= t <= x1:
            px = sx(t)
            lines.append(f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" '
                         f'y2="{mt + ph + 5}" stroke="#444"/>')
            lines.append(f'<text x="{px:.2f}" y="{mt + ph + 18}" '
                         f'text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        if y0 <= t <= y1:
            py = sy(t)
            lines.append(f'<line x1="{ml - 5}" y1="{py:.2f}" x2="{ml}" '
                         f'y2="{py:.2f}" stroke="#444"/>')
            lines.append(f'<text x="{ml - 8}" y="{py + 4:.2f}" '
                         f'text-anchor="end">{_fmt(t)}</text>')
    if xlabel:
        lines.append(f'<text x="{ml + pw / 2}" y="{height - 10}" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        lines.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
                     f'transform="rotate(-90 16 {mt + ph / 2})">{ylabel}</text>')

    for i, s in enumerate(series):
        color = s.get("color", _COLORS[i % len(_COLORS)])
        dash = ' stroke-dasharray="6 4"' if s.get("dash") else ""
        x = np.asarray(s["x"], dtype=float)
        y = np.asarray(s["y"], dtype=float)
        step = max(1, len(x) // 4000)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[::step], y[::step]))
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
                     f'{dash} points="{pts}"/>')
        ly = mt + 16 + 16 * i
        lines.append(f'<line x1="{ml + pw - 130}" y1="{ly - 4}" x2="{ml + pw - 100}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash}/>')
        lines.append(f'<text x="{ml + pw - 94}" y="{ly}">{s["name"]}</text>')

    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
