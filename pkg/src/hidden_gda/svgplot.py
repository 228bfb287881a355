"""Minimal self-contained SVG line and scatter plots."""

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
MAX_POINTS = 4000


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    kind: str = "line"  # "line" or "scatter"
    color: str = ""


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    xlim: tuple = None
    ylim: tuple = None


def _thin(x, y):
    n = len(x)
    if n <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, n - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def _limits(panel):
    xs = [np.asarray(s.x, float) for s in panel.series]
    ys = [np.asarray(s.y, float) for s in panel.series]
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    allx, ally = allx[np.isfinite(allx)], ally[np.isfinite(ally)]

    def lim(v, given):
        if given is not None:
            return given
        if v.size == 0:
            return (0.0, 1.0)
        lo, hi = float(v.min()), float(v.max())
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.04 * (hi - lo)
        return lo - pad, hi + pad

    return lim(allx, panel.xlim), lim(ally, panel.ylim)


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _panel_svg(panel, ox, oy, w, h):
    (x0, x1), (y0, y1) = _limits(panel)
    left, right, top, bottom = 64, 16, 28, 44
    pw, ph = w - left - right, h - top - bottom

    def sx(x):
        return ox + left + (np.asarray(x) - x0) / (x1 - x0) * pw

    def sy(y):
        return oy + top + (1.0 - (np.asarray(y) - y0) / (y1 - y0)) * ph

    out = [
        f'<rect x="{ox + left:.1f}" y="{oy + top:.1f}" width="{pw:.1f}" height="{ph:.1f}" fill="none" stroke="#444"/>',
        f'<text x="{ox + w / 2:.1f}" y="{oy + 18:.1f}" text-anchor="middle" font-size="14">{escape(panel.title)}</text>',
        f'<text x="{ox + left + pw / 2:.1f}" y="{oy + h - 8:.1f}" text-anchor="middle" font-size="12">{escape(panel.xlabel)}</text>',
        f'<text x="{ox + 14:.1f}" y="{oy + top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 {ox + 14:.1f} {oy + top + ph / 2:.1f})">{escape(panel.ylabel)}</text>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{float(sx(t)):.1f}" y="{oy + top + ph + 14:.1f}" text-anchor="middle" font-size="10">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{ox + left - 4:.1f}" y="{float(sy(t)) + 3:.1f}" text-anchor="end" font-size="10">{t:.3g}</text>')
    out.append(f'<clipPath id="c{ox:.0f}_{oy:.0f}"><rect x="{ox + left:.1f}" y="{oy + top:.1f}" width="{pw:.1f}" height="{ph:.1f}"/></clipPath>')
    out.append(f'<g clip-path="url(#c{ox:.0f}_{oy:.0f})">')
    legend = []
    for k, s in enumerate(panel.series):
        color = s.color or PALETTE[k % len(PALETTE)]
        x, y = _thin(np.asarray(s.x, float), np.asarray(s.y, float))
        ok = np.isfinite(x) & np.isfinite(y)
        px, py = sx(x[ok]), sy(y[ok])
        if s.kind == "scatter":
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{color}"/>' for a, b in zip(px, py))
        else:
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        if s.label:
            legend.append((s.label, color))
    out.append("</g>")
    for k, (label, color) in enumerate(legend):
        ly = oy + top + 12 + 14 * k
        out.append(f'<line x1="{ox + left + pw - 110:.1f}" y1="{ly - 4:.1f}" x2="{ox + left + pw - 95:.1f}" y2="{ly - 4:.1f}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ox + left + pw - 90:.1f}" y="{ly:.1f}" font-size="10">{escape(label)}</text>')
    return out


def write_svg(path, panels, width=640, panel_height=400):
    """Stack ``panels`` vertically into one SVG document at ``path``."""
    height = panel_height * len(panels)
    body = []
    for k, panel in enumerate(panels):
        body.extend(_panel_svg(panel, 0, k * panel_height, width, panel_height))
    doc = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        *body,
        "</svg>",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(doc) + "\n")
