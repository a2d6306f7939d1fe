"""Minimal SVG output: a heatmap of rectangles with polyline overlays."""
from __future__ import annotations

from typing import Sequence

import numpy as np

# viridis-like ramp, low to high
_RAMP = np.array([
    (68, 1, 84), (72, 40, 120), (62, 74, 137), (49, 104, 142), (38, 130, 142),
    (31, 158, 137), (53, 183, 121), (109, 205, 89), (180, 222, 44), (253, 231, 37),
], dtype=float)


def color(t: float) -> str:
    """Linear colour map on ``[0, 1]``; values beyond either end are clipped."""
    t = float(np.clip(t, 0.0, 1.0)) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    c = _RAMP[i] + (t - i) * (_RAMP[i + 1] - _RAMP[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def heatmap(values: np.ndarray, x_edges, y_edges, polylines: Sequence[Sequence] = (),
            polygons: Sequence[Sequence] = (), title: str = "", size: int = 480, vmax: float | None = None) -> str:
    """Render ``values[i, j]`` (x index first) as SVG.

    Non-finite cells (integrable singularities) take the top colour.  ``vmax``
    defaults to the largest finite value.
    """
    values = np.asarray(values, dtype=float)
    xe, ye = np.asarray(x_edges, dtype=float), np.asarray(y_edges, dtype=float)
    finite = values[np.isfinite(values)]
    top = vmax if vmax is not None else (float(finite.max()) if finite.size else 1.0)
    top = top if top > 0 else 1.0
    pad = 40
    w = h = size
    sx = w / (xe[-1] - xe[0])
    sy = h / (ye[-1] - ye[0])

    def px(x, y):
        return pad + (x - xe[0]) * sx, pad + h - (y - ye[0]) * sy

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 2 * pad}" height="{h + 2 * pad}">',
           f'<rect x="0" y="0" width="{w + 2 * pad}" height="{h + 2 * pad}" fill="white"/>']
    if title:
        out.append(f'<text x="{pad}" y="{pad * 0.6:.1f}" font-family="sans-serif" font-size="14">{_esc(title)}</text>')
    cw, ch = (xe[1] - xe[0]) * sx, (ye[1] - ye[0]) * sy
    for i in range(values.shape[0]):
        for j in range(values.shape[1]):
            v = values[i, j]
            if v == 0:
                continue
            t = 1.0 if not np.isfinite(v) else v / top
            x, y = px(xe[i], ye[j + 1])
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.3:.2f}" height="{ch + 0.3:.2f}" '
                       f'fill="{color(t)}"/>')
    for poly in polygons:
        pts = list(poly) + [poly[0]]
        out.append(_polyline(pts, px, "black", 1.2))
    for line in polylines:
        out.append(_polyline(line, px, "red", 1.0, dash=True))
    x0, y0 = px(xe[0], ye[0])
    out.append(f'<rect x="{pad}" y="{pad}" width="{w}" height="{h}" fill="none" stroke="gray"/>')
    out.append(f'<text x="{x0:.1f}" y="{y0 + 16:.1f}" font-family="sans-serif" font-size="11">{xe[0]:.6g}</text>')
    out.append(f'<text x="{pad + w - 30:.1f}" y="{y0 + 16:.1f}" font-family="sans-serif" font-size="11">'
               f'{xe[-1]:.6g}</text>')
    out.append(f'<text x="2" y="{y0:.1f}" font-family="sans-serif" font-size="11">{ye[0]:.6g}</text>')
    out.append(f'<text x="2" y="{pad + 10}" font-family="sans-serif" font-size="11">{ye[-1]:.6g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _polyline(points, px, stroke: str, width: float, dash: bool = False) -> str:
    coords = " ".join("%.2f,%.2f" % px(float(x), float(y)) for x, y in points)
    extra = ' stroke-dasharray="4,3"' if dash else ""
    return f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"{extra}/>'


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
