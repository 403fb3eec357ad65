"""Minimal deterministic SVG output: labelled scatter plots and histogram/density overlays.

Same input gives byte-identical text. Canvas is a fixed 800x600 viewBox; axis
ranges are the data range padded by 5% on each side.
"""

from __future__ import annotations

from html import escape
from typing import Sequence

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = 60
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
)


def _range(v: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(v)), float(np.max(v))
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xr, yr):
        self.x0, self.x1 = xr
        self.y0, self.y1 = yr

    def x(self, v):
        return MARGIN + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def y(self, v):
        return HEIGHT - MARGIN - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)


def _header(title: str, xlabel: str, ylabel: str, f: _Frame) -> list[str]:
    w, h, m = WIDTH, HEIGHT, MARGIN
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" fill="none" stroke="black"/>',
        f'<text x="{w / 2:.1f}" y="{m / 2:.1f}" text-anchor="middle" font-size="18">{escape(title)}</text>',
        f'<text x="{w / 2:.1f}" y="{h - 15}" text-anchor="middle" font-size="14">{escape(xlabel)}</text>',
        f'<text x="15" y="{h / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 15 {h / 2:.1f})">{escape(ylabel)}</text>',
        f'<text x="{m}" y="{h - m + 16}" font-size="11">{f.x0:.3g}</text>',
        f'<text x="{w - m}" y="{h - m + 16}" text-anchor="end" font-size="11">{f.x1:.3g}</text>',
        f'<text x="{m - 4}" y="{h - m}" text-anchor="end" font-size="11">{f.y0:.3g}</text>',
        f'<text x="{m - 4}" y="{m + 10}" text-anchor="end" font-size="11">{f.y1:.3g}</text>',
    ]


def scatter_svg(points, labels: Sequence[str] | None = None, title: str = "",
                xlabel: str = "dim1", ylabel: str = "dim2") -> str:
    """Scatter of an ``n x 2`` array, one palette color per distinct label (cycling past 9)."""
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ValueError(f"scatter needs n x 2 points, got {P.shape}")
    labels = ["all"] * len(P) if labels is None else [str(s) for s in labels]
    if len(labels) != len(P):
        raise ValueError("one label per point required")
    f = _Frame(_range(P[:, 0]), _range(P[:, 1]))
    out = _header(title, xlabel, ylabel, f)
    classes = sorted(set(labels))
    color = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(classes)}
    for (px, py), lab in zip(P, labels):
        out.append(f'<circle cx="{f.x(px):.2f}" cy="{f.y(py):.2f}" r="2.5" fill="{color[lab]}" fill-opacity="0.7"/>')
    for i, c in enumerate(classes):
        y = MARGIN + 14 + 16 * i
        out.append(f'<rect x="{WIDTH - MARGIN - 140}" y="{y - 9}" width="10" height="10" fill="{color[c]}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 125}" y="{y}" font-size="12">{escape(c)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def histogram_overlay_svg(edges, heights, curve_x, curve_y, title: str = "",
                          xlabel: str = "eigenvalue", ylabel: str = "density") -> str:
    """Bars for a density histogram with a reference curve drawn on top."""
    edges = np.asarray(edges, dtype=np.float64)
    heights = np.asarray(heights, dtype=np.float64)
    cx = np.asarray(curve_x, dtype=np.float64)
    cy = np.asarray(curve_y, dtype=np.float64)
    top = max(float(heights.max()), float(cy.max()))
    f = _Frame((float(edges[0]), float(edges[-1])), (0.0, 1.05 * top if top > 0 else 1.0))
    out = _header(title, xlabel, ylabel, f)
    for lo, hi, h in zip(edges[:-1], edges[1:], heights):
        x, y = f.x(lo), f.y(h)
        out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{f.x(hi) - x:.2f}" height="{f.y(0) - y:.2f}" '
                   f'fill="{PALETTE[0]}" fill-opacity="0.5" stroke="white" stroke-width="0.5"/>')
    pts = " ".join(f"{f.x(a):.2f},{f.y(b):.2f}" for a, b in zip(cx, cy))
    out.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[3]}" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
