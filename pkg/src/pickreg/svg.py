"""Self-contained semilog SVG plots of certified [lo, hi] bands."""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

from .numerics import Enclosure

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")

Band = Tuple[int, Enclosure]


def _log10(x) -> Optional[float]:
    x = float(x)
    return math.log10(x) if x > 0 else None


def semilog_bands(series: Sequence[Tuple[str, Sequence[Band]]], title: str = "",
                  ylabel: str = "value", width: int = 640, height: int = 400) -> str:
    """Plot each series as a shaded band between lo and hi on a log10 axis.

    Nonpositive lower endpoints are drawn at the bottom edge so an
    uncertified sign stays visible.
    """
    left, right, top, bottom = 70, 20, 36, 46
    pts = [(n, e) for _, s in series for n, e in s]
    if not pts:
        raise ValueError("nothing to plot")
    ns = [n for n, _ in pts]
    logs = [v for _, e in pts for v in (_log10(e.lo), _log10(e.hi)) if v is not None]
    ymin, ymax = (math.floor(min(logs)), math.ceil(max(logs))) if logs else (-1, 1)
    if ymin == ymax:
        ymin, ymax = ymin - 1, ymax + 1
    xmin, xmax = min(ns), max(ns)
    if xmin == xmax:
        xmin, xmax = xmin - 1, xmax + 1
    pw, ph = width - left - right, height - top - bottom

    def X(n):
        return left + (n - xmin) / (xmax - xmin) * pw

    def Y(v):
        if v is None:
            return top + ph
        return top + (ymax - v) / (ymax - ymin) * ph

    out: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    step = max(1, (ymax - ymin) // 10)
    for e in range(ymin, ymax + 1, step):
        y = Y(e)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    xstep = max(1, (xmax - xmin) // 10)
    for n in range(xmin, xmax + 1, xstep):
        x = X(n)
        out.append(f'<text x="{x:.1f}" y="{top + ph + 16}" text-anchor="middle">{n}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">n</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for idx, (label, s) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        s = sorted(s, key=lambda b: b[0])
        upper = [f"{X(n):.2f},{Y(_log10(e.hi)):.2f}" for n, e in s]
        lower = [f"{X(n):.2f},{Y(_log10(e.lo)):.2f}" for n, e in reversed(s)]
        out.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" '
                   f'fill-opacity="0.3" stroke="{color}" stroke-width="0.8"/>')
        for n, e in s:
            out.append(f'<line x1="{X(n):.2f}" y1="{Y(_log10(e.lo)):.2f}" x2="{X(n):.2f}" '
                       f'y2="{Y(_log10(e.hi)):.2f}" stroke="{color}" stroke-width="2"/>')
        ly = top + 14 + 14 * idx
        out.append(f'<rect x="{left + pw - 150}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 135}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
