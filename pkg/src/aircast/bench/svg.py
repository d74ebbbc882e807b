"""Minimal SVG line charts: axes, a shaded interval band and polylines."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#222222", "#d95f02", "#1b9e77", "#7570b3", "#e7298a")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_chart(x_labels, series: dict, band=None, title: str = "",
               width: int = 900, height: int = 320) -> str:
    """Render ``series`` (name -> values, all the same length) as one SVG document.

    ``band`` is an optional ``(lower, upper)`` pair drawn behind the lines.
    Only the first and last x labels are printed.
    """
    names = list(series)
    values = [np.asarray(series[k], dtype=float) for k in names]
    n = len(values[0]) if values else 0
    left, right, top, bottom = 60, 20, 30, 40
    pw, ph = width - left - right, height - top - bottom
    pool = [v for v in values]
    if band is not None:
        pool += [np.asarray(band[0], float), np.asarray(band[1], float)]
    finite = np.concatenate([v[np.isfinite(v)] for v in pool]) if pool else np.zeros(1)
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0

    def px(i):
        return left + (pw * i / (n - 1) if n > 1 else pw / 2)

    def py(v):
        return top + ph * (1.0 - (v - lo) / (hi - lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{left}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        v = lo + frac * (hi - lo)
        y = py(v)
        out.append(f'<text x="{left - 6}" y="{_fmt(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{v:.1f}</text>')
    if n:
        labels = [str(x) for x in x_labels]
        out.append(f'<text x="{left}" y="{height - 12}" font-family="sans-serif" '
                   f'font-size="10">{escape(labels[0])}</text>')
        out.append(f'<text x="{left + pw}" y="{height - 12}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{escape(labels[-1])}</text>')
    if band is not None and n:
        lower, upper = np.asarray(band[0], float), np.asarray(band[1], float)
        pts = [f"{_fmt(px(i))},{_fmt(py(upper[i]))}" for i in range(n)]
        pts += [f"{_fmt(px(i))},{_fmt(py(lower[i]))}" for i in range(n - 1, -1, -1)]
        out.append(f'<polygon points="{" ".join(pts)}" fill="#d95f02" fill-opacity="0.15" stroke="none"/>')
    for k, (name, v) in enumerate(zip(names, values)):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_fmt(px(i))},{_fmt(py(v[i]))}" for i in range(n) if np.isfinite(v[i]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
        ly = top + 12 + 14 * k
        out.append(f'<line x1="{left + pw - 110}" y1="{ly}" x2="{left + pw - 90}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 84}" y="{ly + 4}" font-family="sans-serif" '
                   f'font-size="11">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
