"""Minimal, dependency-free SVG violin plots.

Output depends only on the summary records passed in (no timestamps, fixed
number formatting), so identical inputs give byte-identical files.
"""
from __future__ import annotations

from html import escape

from .evaluation import Summary

PALETTE = {"continuous": "#d62728", "binary": "#1f77b4", "mixed": "#2ca02c",
           "cross": "#9467bd"}
DEFAULT_COLOR = "#7f7f7f"

SLOT = 56
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 40, 70
HEIGHT = 320


def _f(v: float) -> str:
    return f"{v:.2f}"


def violin_svg(groups, title: str, ylabel: str = "ARI", y_range=(-0.25, 1.05)) -> str:
    """Render ``groups`` -- a list of ``(label, summary, color_key)`` -- as SVG."""
    lo, hi = y_range
    for _, s, _ in groups:
        lo, hi = min(lo, s.min), max(hi, s.max)
    width = LEFT + RIGHT + SLOT * max(len(groups), 1)
    plot_h = HEIGHT - TOP - BOTTOM

    def ypix(v):
        return TOP + (hi - v) / (hi - lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{HEIGHT}" '
        f'viewBox="0 0 {width} {HEIGHT}" font-family="sans-serif" font-size="10">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">'
        f'{escape(title)}</text>',
        f'<text x="14" y="{TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {TOP + plot_h / 2:.1f})">{escape(ylabel)}</text>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>',
    ]
    step = 0.25
    tick = step * int(lo / step)
    while tick <= hi + 1e-9:
        y = ypix(tick)
        out.append(f'<line x1="{LEFT - 4}" y1="{_f(y)}" x2="{width - RIGHT}" y2="{_f(y)}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_f(y + 3)}" text-anchor="end">{tick:.2f}</text>')
        tick += step

    half = SLOT * 0.42
    for idx, (label, s, key) in enumerate(groups):
        cx = LEFT + SLOT * idx + SLOT / 2
        color = PALETTE.get(key, DEFAULT_COLOR)
        out.append(_violin_path(s, cx, half, ypix, lo, hi, color))
        ym = ypix(s.median)
        out.append(f'<line x1="{_f(cx - half * 0.6)}" y1="{_f(ym)}" '
                   f'x2="{_f(cx + half * 0.6)}" y2="{_f(ym)}" stroke="black" stroke-width="2"/>')
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(ypix(s.mean))}" r="2.5" fill="white" '
                   f'stroke="black"/>')
        out.append(f'<line x1="{_f(cx)}" y1="{_f(ypix(s.min))}" x2="{_f(cx)}" '
                   f'y2="{_f(ypix(s.max))}" stroke="black" stroke-width="0.8"/>')
        ly = TOP + plot_h + 12
        out.append(f'<text x="{_f(cx)}" y="{ly}" text-anchor="end" '
                   f'transform="rotate(-45 {_f(cx)} {ly})">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _violin_path(s: Summary, cx, half, ypix, lo, hi, color) -> str:
    peak = max(s.density) or 1.0
    pts = [(y, d / peak * half) for y, d in zip(s.grid, s.density) if lo <= y <= hi]
    if not pts:
        return ""
    right = [f"{_f(cx + w)},{_f(ypix(y))}" for y, w in pts]
    left = [f"{_f(cx - w)},{_f(ypix(y))}" for y, w in reversed(pts)]
    return (f'<polygon points="{" ".join(right + left)}" fill="{color}" '
            f'fill-opacity="0.45" stroke="{color}"/>')
