"""Static SVG plot of a parametric profile: L_i(q) solid, P_i(q) dashed."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from . import numeric as nm
from .io import atomic_write

WIDTH, HEIGHT = 800, 600
MARGIN = (70, 30, 40, 60)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    return f"{v:.4g}"


def render_svg(profile) -> str:
    """Byte-deterministic SVG text; an empty profile yields axes only."""
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom
    qs = [nm.to_float(q) for q in profile.q]
    Ls = [[nm.to_float(v) for v in row] for row in profile.L]
    Ps = [[nm.to_float(v) for v in row] for row in profile.P] if qs else []
    ys = [v for row in Ls + Ps for v in row]
    x0, x1 = (min(qs), max(qs)) if qs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (-1.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<g stroke="black" stroke-width="1">'
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>'
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/></g>']
    labels = []
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        labels.append(f'<text x="{_fmt(sx(xv))}" y="{top + ph + 18}" text-anchor="middle">{_tick(xv)}</text>')
        labels.append(f'<text x="{left - 6}" y="{_fmt(sy(yv) + 4)}" text-anchor="end">{_tick(yv)}</text>')
    labels.append(f'<text x="{left + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle">q</text>')
    labels.append(f'<text x="18" y="{top + ph / 2:.0f}" text-anchor="middle" '
                  f'transform="rotate(-90 18 {top + ph / 2:.0f})">log λ</text>')
    out.append('<g font-family="sans-serif" font-size="12">' + "".join(labels) + "</g>")

    if qs:
        n = len(Ls[0])
        for i in range(n):
            col = PALETTE[i % len(PALETTE)]
            pts = " ".join(f"{_fmt(sx(q))},{_fmt(sy(row[i]))}" for q, row in zip(qs, Ls))
            out.append(f'<polyline class="L" fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        for i in range(n):
            col = PALETTE[i % len(PALETTE)]
            pts = " ".join(f"{_fmt(sx(q))},{_fmt(sy(row[i]))}" for q, row in zip(qs, Ps))
            out.append(f'<polyline class="P" fill="none" stroke="{col}" stroke-width="1" '
                       f'stroke-dasharray="5,3" points="{pts}"/>')
        legend = []
        for i in range(n):
            col = PALETTE[i % len(PALETTE)]
            y = top + 10 + 16 * i
            x = left + pw - 110
            legend.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{col}"/>'
                          f'<text x="{x + 26}" y="{y + 4}">{escape(f"L_{i + 1}, P_{i + 1}")}</text>')
        out.append('<g font-family="sans-serif" font-size="12">' + "".join(legend) + "</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(profile, path) -> Path:
    """Write the profile plot atomically."""
    return atomic_write(path, render_svg(profile))
