"""Dependency-free SVG scatter of an SODP with its band circles."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .sodp import RegionPartition

_SIZE = 480
_MARGIN = 24


def sodp_svg(points: np.ndarray, partition: RegionPartition, title: str = "") -> str:
    points = np.asarray(points, dtype=float)
    extent = max(1.15 * partition.r3, float(np.abs(points).max()) if points.size else 0.0)
    if extent == 0:
        extent = 1.0
    half = (_SIZE - 2 * _MARGIN) / 2.0
    c = _SIZE / 2.0
    scale = half / extent

    def xy(d1, d2):
        return c + d1 * scale, c - d2 * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f"<title>{escape(title)}</title>",
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{c}" x2="{_SIZE - _MARGIN}" y2="{c}" stroke="black" stroke-width="1"/>',
        f'<line x1="{c}" y1="{_MARGIN}" x2="{c}" y2="{_SIZE - _MARGIN}" stroke="black" stroke-width="1"/>',
        '<text x="4" y="14" font-size="11" font-family="sans-serif">x(t+2)-x(t+1) vs x(t+1)-x(t)</text>',
    ]
    for r in partition.radii:
        out.append(
            f'<circle cx="{c}" cy="{c}" r="{r * scale:.3f}" fill="none" stroke="#c0392b" stroke-width="1"/>'
        )
    out.append('<g fill="#1f4e79" fill-opacity="0.5">')
    for d1, d2 in points:
        x, y = xy(d1, d2)
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.2"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
