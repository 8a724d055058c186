"""Self-contained SVG trajectory plots.

No external resources, fonts, or scripts: a fixed-size <svg> with
polylines, an optional optimal-band rectangle, ticks, and axis labels.
Output text is deterministic for fixed input.
"""

from __future__ import annotations

import numpy as np

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 44


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, count)


def trajectory_svg(rec_ks, states, width: int, height: int,
                   band=None, title: str = "") -> str:
    """Plot per-node state trajectories against the step index.

    `band`, when given as (lo, hi), is drawn as a shaded horizontal
    stripe (the optimal consensus interval).
    """
    rec_ks = np.asarray(rec_ks, dtype=float)
    states = np.asarray(states, dtype=float)
    n = states.shape[1]

    x_lo, x_hi = float(rec_ks.min()), float(max(rec_ks.max(), 1.0))
    y_lo, y_hi = float(states.min()), float(states.max())
    if band is not None:
        y_lo = min(y_lo, float(band[0]))
        y_hi = max(y_hi, float(band[1]))
    pad = 0.05 * (y_hi - y_lo) or 1.0
    y_lo -= pad
    y_hi += pad

    plot_w = width - MARGIN_L - MARGIN_R
    plot_h = height - MARGIN_T - MARGIN_B

    def px(k: float) -> float:
        return MARGIN_L + plot_w * (k - x_lo) / (x_hi - x_lo)

    def py(v: float) -> float:
        return MARGIN_T + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo))

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>')
    if title:
        out.append(
            f'<text x="{width / 2:.1f}" y="18" font-family="sans-serif" font-size="13" '
            f'text-anchor="middle">{title}</text>'
        )

    if band is not None:
        b0, b1 = py(float(band[1])), py(float(band[0]))
        out.append(
            f'<rect x="{_fmt(px(x_lo))}" y="{_fmt(b0)}" width="{_fmt(plot_w)}" '
            f'height="{_fmt(max(b1 - b0, 1.0))}" fill="#d0e8d0" fill-opacity="0.6"/>'
        )

    # axes
    out.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    )
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(MARGIN_T + plot_h)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(MARGIN_T + plot_h + 5)}" stroke="#000000" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{_fmt(MARGIN_T + plot_h + 18)}" '
            f'font-family="sans-serif" font-size="11" text-anchor="middle">{t:g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        out.append(
            f'<line x1="{_fmt(MARGIN_L - 5)}" y1="{_fmt(y)}" x2="{_fmt(MARGIN_L)}" '
            f'y2="{_fmt(y)}" stroke="#000000" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(MARGIN_L - 8)}" y="{_fmt(y + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{t:.4g}</text>'
        )
    out.append(
        f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{height - 8}" '
        f'font-family="sans-serif" font-size="12" text-anchor="middle">k</text>'
    )
    out.append(
        f'<text x="14" y="{MARGIN_T + plot_h / 2:.1f}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {MARGIN_T + plot_h / 2:.1f})">state</text>'
    )

    for i in range(n):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(px(k))},{_fmt(py(v))}" for k, v in zip(rec_ks, states[:, i])
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
