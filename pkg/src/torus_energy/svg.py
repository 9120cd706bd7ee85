"""Minimal SVG scatter plots of torus configurations."""

from __future__ import annotations

import math

import numpy as np

from .geometry import TWO_PI, wrap

SIZE = 400
MARGIN = 40


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _marker(cx: float, cy: float, r: float = 4.0) -> str:
    return f'<circle class="point" cx="{cx:.3f}" cy="{cy:.3f}" r="{r}" fill="#1f4e9a" fill-opacity="0.8"/>'


def circle_plot(angles, title: str = "") -> str:
    """Points of the circle drawn on a circle; one marker per point."""
    c = SIZE / 2 + MARGIN / 2
    R = SIZE / 2 - MARGIN
    out = _header(SIZE + MARGIN, SIZE + MARGIN)
    out.append(f'<circle cx="{c}" cy="{c}" r="{R}" fill="none" stroke="black" stroke-width="1"/>')
    # angle zero tick
    out.append(f'<line x1="{c + R - 6}" y1="{c}" x2="{c + R + 6}" y2="{c}" stroke="black"/>')
    out.append(f'<text x="{c + R + 8}" y="{c + 4}" font-size="11">0</text>')
    for a in wrap(np.ravel(angles)):
        out.append(_marker(c + R * math.cos(a), c - R * math.sin(a)))
    if title:
        out.append(f'<text x="{MARGIN / 2}" y="16" font-size="13">{title}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def square_plot(points, title: str = "") -> str:
    """Points of the 2-torus in the square ``[0, 2 pi)^2``.

    Opposite edges are identified; this is marked with dashed edges and
    matching arrow heads.  Axes carry ticks at multiples of ``pi / 2``.
    """
    pts = wrap(np.atleast_2d(points))
    x0, y0 = MARGIN, MARGIN
    side = SIZE - MARGIN
    out = _header(SIZE + MARGIN, SIZE + MARGIN)
    out.append(
        f'<rect x="{x0}" y="{y0}" width="{side}" height="{side}" fill="none" '
        'stroke="black" stroke-dasharray="6,4"/>'
    )
    mid = side / 2
    for x, y, rot in ((x0 + mid, y0, 0), (x0 + mid, y0 + side, 0), (x0, y0 + mid, 90), (x0 + side, y0 + mid, 90)):
        out.append(
            f'<path class="wrap" d="M -6 -4 L 0 0 L -6 4" fill="none" stroke="#b03a2e" '
            f'transform="translate({x} {y}) rotate({rot})"/>'
        )
    for k in range(5):
        t = k * side / 4
        label = ["0", "pi/2", "pi", "3pi/2", "2pi"][k]
        out.append(f'<line x1="{x0 + t}" y1="{y0 + side}" x2="{x0 + t}" y2="{y0 + side + 5}" stroke="black"/>')
        out.append(f'<text x="{x0 + t - 8}" y="{y0 + side + 18}" font-size="10">{label}</text>')
        out.append(f'<line x1="{x0 - 5}" y1="{y0 + side - t}" x2="{x0}" y2="{y0 + side - t}" stroke="black"/>')
        out.append(f'<text x="2" y="{y0 + side - t + 4}" font-size="10">{label}</text>')
    for p in pts:
        out.append(_marker(x0 + side * p[0] / TWO_PI, y0 + side - side * p[1] / TWO_PI))
    if title:
        out.append(f'<text x="{x0}" y="16" font-size="13">{title}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def configuration_plot(points, title: str = "") -> str | None:
    """Circle plot for ``d = 1``, square plot for ``d = 2``, ``None`` otherwise."""
    pts = np.atleast_2d(points)
    if pts.shape[1] == 1:
        return circle_plot(pts[:, 0], title)
    if pts.shape[1] == 2:
        return square_plot(pts, title)
    return None
