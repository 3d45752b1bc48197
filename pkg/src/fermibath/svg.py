"""Minimal self-contained SVG charts: line plots and heatmaps."""
from __future__ import annotations

import math
from html import escape
from pathlib import Path

import numpy as np

W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 55  # margins
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
MAX_CELLS = 256


def _ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _frame(title, xlabel, ylabel, xlim, ylim):
    x0, x1 = xlim
    y0, y1 = ylim
    pw, ph = W - ML - MR, H - MT - MB

    def sx(x):
        return ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MT + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{sx(v):.2f}" y1="{MT + ph}" x2="{sx(v):.2f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(v):.2f}" y="{MT + ph + 18}" text-anchor="middle" font-size="11">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{ML - 5}" y1="{sy(v):.2f}" x2="{ML}" y2="{sy(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{sy(v) + 4:.2f}" text-anchor="end" font-size="11">{v:.4g}</text>')
    out.append(f'<text x="{ML + pw / 2}" y="{H - 12}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 16 {MT + ph / 2})">{escape(ylabel)}</text>')
    return out, sx, sy


def _limits(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        pad = abs(lo) * 0.05 or 0.5
        return lo - pad, hi + pad
    return lo, hi


def line_chart(series, title="", xlabel="", ylabel="") -> str:
    """``series`` is a list of (label, x, y); NaNs break the polyline."""
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    out, sx, sy = _frame(title, xlabel, ylabel, _limits(xs), _limits(ys))
    for i, (label, x, y) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        # at most ~2 points per horizontal pixel
        stride = max(1, x.size // (2 * (W - ML - MR)))
        pts, segs = [], []
        for a, b in zip(x[::stride], y[::stride]):
            if math.isfinite(a) and math.isfinite(b):
                pts.append(f"{sx(a):.2f},{sy(b):.2f}")
            elif pts:
                segs.append(pts)
                pts = []
        if pts:
            segs.append(pts)
        for p in segs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.3" points="{" ".join(p)}"/>')
        out.append(f'<text x="{W - MR - 8}" y="{MT + 16 + 15 * i}" text-anchor="end" font-size="11" '
                   f'fill="{color}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out)


def _pool_min(z, cells):
    """Block-minimum downsampling (keeps the most negative value of each block)."""
    n0, n1 = z.shape
    f0, f1 = max(1, math.ceil(n0 / cells)), max(1, math.ceil(n1 / cells))
    if f0 == f1 == 1:
        return z
    p0, p1 = -n0 % f0, -n1 % f1
    zp = np.pad(z, ((0, p0), (0, p1)), constant_values=np.nan)
    blocks = zp.reshape(zp.shape[0] // f0, f0, zp.shape[1] // f1, f1)
    with np.errstate(all="ignore"):
        allnan = np.all(np.isnan(blocks), axis=(1, 3))
        out = np.nanmin(np.where(np.isnan(blocks), np.inf, blocks), axis=(1, 3))
    out[allnan] = np.nan
    return out


def _color(v, lo):
    # white at 0, dark red at the most negative value
    if not math.isfinite(v):
        return "#e8e8e8"
    s = 0.0 if lo >= 0 else min(1.0, max(0.0, v / lo))
    r = int(255 - 120 * s)
    gb = int(255 - 255 * s)
    return f"#{r:02x}{gb:02x}{gb:02x}"


def heatmap(z, x_extent, y_extent, title="", xlabel="", ylabel="") -> str:
    """Heatmap of z[row=y, col=x] (row 0 at the bottom); NaN cells are grey."""
    z = _pool_min(np.asarray(z, dtype=float), MAX_CELLS)
    out, sx, sy = _frame(title, xlabel, ylabel, x_extent, y_extent)
    ny, nx = z.shape
    lo = float(np.nanmin(z)) if np.any(np.isfinite(z)) else 0.0
    x0, x1 = x_extent
    y0, y1 = y_extent
    cw = (sx(x1) - sx(x0)) / nx
    ch = (sy(y0) - sy(y1)) / ny
    for i in range(ny):
        for j in range(nx):
            out.append(f'<rect x="{sx(x0) + j * cw:.2f}" y="{sy(y0) - (i + 1) * ch:.2f}" '
                       f'width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" fill="{_color(z[i, j], lo)}"/>')
    out.append(f'<text x="{W - MR}" y="{MT - 6}" text-anchor="end" font-size="11">min {lo:.4g}</text>')
    out.append("</svg>")
    return "\n".join(out)


def write_svg(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text)
    return path
