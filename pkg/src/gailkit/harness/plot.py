"""Dependency-free SVG line chart: scaled score against dataset size."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

Y_MIN, Y_MAX = -0.1, 1.1
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def emit_plot(scores, path, width=480, height=320, title="Scaled score vs. trajectories"):
    """One polyline per algorithm; y clipped to [-0.1, 1.1] with guides at 0 and 1."""
    scores = list(scores)
    if not scores:
        raise ValueError("nothing to plot")
    left, right, top, bottom = 56, 120, 32, 44
    pw, ph = width - left - right, height - top - bottom
    xs = sorted({s.n_traj for s in scores})
    x_lo, x_hi = min(xs), max(xs)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 1, x_hi + 1

    def sx(x):
        return left + pw * (x - x_lo) / (x_hi - x_lo)

    def sy(y):
        y = float(np.clip(y, Y_MIN, Y_MAX)) if np.isfinite(y) else Y_MIN
        return top + ph * (Y_MAX - y) / (Y_MAX - Y_MIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
        f"{escape(title)}</text>",
        # axes
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for ref in (0.0, 1.0):
        parts.append(
            f'<line class="ref" x1="{left}" y1="{sy(ref):.1f}" x2="{left + pw}" y2="{sy(ref):.1f}" '
            'stroke="gray" stroke-dasharray="4 3"/>'
        )
    for y in (0.0, 0.5, 1.0):
        parts.append(f'<text x="{left - 6}" y="{sy(y) + 4:.1f}" text-anchor="end" '
                     f'font-size="11">{y:g}</text>')
    for x in xs:
        parts.append(f'<text x="{sx(x):.1f}" y="{top + ph + 16}" text-anchor="middle" '
                     f'font-size="11">{x}</text>')
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" '
                 'font-size="12">trajectories in dataset</text>')
    parts.append(f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 14 {top + ph / 2:.1f})">scaled score</text>')

    algos = list(dict.fromkeys(s.algorithm for s in scores))
    for k, algo in enumerate(algos):
        color = COLORS[k % len(COLORS)]
        pts = sorted((s.n_traj, s.scaled) for s in scores if s.algorithm == algo)
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        if len(pts) > 1:
            parts.append(f'<polyline class="series" points="{coords}" fill="none" '
                         f'stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>')
        ly = top + 14 + 18 * k
        parts.append(f'<g class="legend"><line x1="{left + pw + 12}" y1="{ly}" '
                     f'x2="{left + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
                     f'<text x="{left + pw + 38}" y="{ly + 4}" font-size="11">{escape(algo)}</text></g>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
