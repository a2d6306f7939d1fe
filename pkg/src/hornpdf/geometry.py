"""Convex polygons in the plane: clipping, splitting, and exact piecewise quadrature.

A half-plane ``(a, b, c)`` is the set ``a*x + b*y + c >= 0``.  Polygons are
``(k, 2)`` arrays of vertices in counter-clockwise order.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

HalfPlane = tuple[float, float, float]

_EPS = 1e-13


def polygon_area(poly) -> float:
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _dedupe(pts: list, labels: list | None, tol: float):
    """Drop consecutive (cyclic) duplicate vertices."""
    keep_pts, keep_lab = [], []
    for i, p in enumerate(pts):
        if keep_pts and np.hypot(*(np.subtract(p, keep_pts[-1]))) <= tol:
            if labels is not None:
                keep_lab[-1] = labels[i]
            continue
        keep_pts.append(p)
        if labels is not None:
            keep_lab.append(labels[i])
    while len(keep_pts) > 1 and np.hypot(*(np.subtract(keep_pts[0], keep_pts[-1]))) <= tol:
        keep_pts.pop()
        if labels is not None:
            keep_lab.pop()
    return keep_pts, keep_lab


def clip_labeled(poly: Sequence, labels: Sequence, hp: HalfPlane, label, tol: float = _EPS):
    """Sutherland-Hodgman clip of a convex polygon, tracking edge labels.

    ``labels[i]`` names the edge from vertex ``i`` to ``i + 1``.  Edges created
    by the cut get ``label``.
    """
    a, b, c = hp
    scale = max(1.0, float(np.max(np.abs(poly)))) if len(poly) else 1.0
    thr = tol * scale * max(1.0, abs(a) + abs(b))
    out_pts, out_lab = [], []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp = a * p[0] + b * p[1] + c
        fq = a * q[0] + b * q[1] + c
        p_in, q_in = fp >= -thr, fq >= -thr
        if p_in:
            out_pts.append(tuple(p))
            out_lab.append(labels[i])
        if p_in != q_in and abs(fp - fq) > 0:
            t = fp / (fp - fq)
            x = (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
            if p_in:
                # leaving: the next edge runs along the cut
                out_pts.append(x)
                out_lab.append(label)
            else:
                out_pts.append(x)
                out_lab.append(labels[i])
    pts, labs = _dedupe(out_pts, out_lab, tol * scale)
    if len(pts) < 3:
        return np.zeros((0, 2)), []
    return np.array(pts), labs


def clip(poly, hp: HalfPlane, tol: float = _EPS) -> np.ndarray:
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return np.zeros((0, 2))
    pts, _ = clip_labeled(poly, [None] * len(poly), hp, None, tol)
    return pts


def clip_all(poly, hps: Sequence[HalfPlane]) -> np.ndarray:
    poly = np.asarray(poly, dtype=float)
    for hp in hps:
        poly = clip(poly, hp)
        if len(poly) < 3:
            return np.zeros((0, 2))
    return poly


def rectangle(x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
    return np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], dtype=float)


def split(poly, line: HalfPlane) -> list[np.ndarray]:
    """Cut a convex polygon along a line; return the non-empty pieces."""
    a, b, c = line
    pieces = [clip(poly, (a, b, c)), clip(poly, (-a, -b, -c))]
    return [p for p in pieces if len(p) >= 3 and abs(polygon_area(p)) > 0]


def split_all(poly, lines: Sequence[HalfPlane]) -> list[np.ndarray]:
    pieces = [np.asarray(poly, dtype=float)] if len(poly) >= 3 else []
    for line in lines:
        nxt = []
        for p in pieces:
            nxt.extend(split(p, line))
        pieces = nxt
    return pieces


def contains(poly, pts, tol: float = 0.0) -> np.ndarray:
    """Point-in-convex-polygon test (counter-clockwise vertices)."""
    poly = np.asarray(poly, dtype=float)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if len(poly) < 3:
        return np.zeros(len(pts), dtype=bool)
    inside = np.ones(len(pts), dtype=bool)
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        ex, ey = q - p
        cross = ex * (pts[:, 1] - p[1]) - ey * (pts[:, 0] - p[0])
        inside &= cross >= -tol * np.hypot(ex, ey)
    return inside


@lru_cache(maxsize=None)
def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss-Legendre rule on the reference triangle (0,0), (1,0), (0,1).

    Exact for polynomials of total degree ``2 * order - 2``.  Returns
    barycentric-free coordinates ``(u, v)`` and weights summing to 1/2.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    s = (x + 1) / 2
    ws = w / 2
    u = s[:, None] * np.ones_like(s)[None, :]
    v = (1 - s[:, None]) * s[None, :]
    wt = ws[:, None] * ws[None, :] * (1 - s[:, None])
    # (u, v) = (s1, (1 - s1) s2); Jacobian 1 - s1
    return np.column_stack([u.ravel(), v.ravel()]), wt.ravel()


def triangulate(poly) -> list[np.ndarray]:
    poly = np.asarray(poly, dtype=float)
    return [np.array([poly[0], poly[i], poly[i + 1]]) for i in range(1, len(poly) - 1)]


def quadrature_nodes(polys: Sequence[np.ndarray], order: int = 6):
    """Quadrature nodes/weights over a union of disjoint convex polygons.

    Also returns, for each node, the index of the polygon it belongs to.
    """
    ref, w = triangle_rule(order)
    pts, wts, owner = [], [], []
    for k, poly in enumerate(polys):
        for tri in triangulate(poly):
            p0, p1, p2 = tri
            jac = abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
            if jac == 0:
                continue
            pts.append(p0 + np.outer(ref[:, 0], p1 - p0) + np.outer(ref[:, 1], p2 - p0))
            wts.append(w * jac)
            owner.append(np.full(len(w), k))
    if not pts:
        return np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=int)
    return np.concatenate(pts), np.concatenate(wts), np.concatenate(owner)


def integrate_piecewise(f: Callable[[np.ndarray], np.ndarray], poly, cuts: Sequence[HalfPlane] = (),
                        order: int = 6) -> float:
    """Integrate ``f`` over a convex polygon after cutting along ``cuts``.

    Exact (to rounding) when ``f`` is a polynomial of degree ``<= 2*order-2``
    on every cell of the arrangement.
    """
    pieces = split_all(poly, cuts)
    pts, wts, _ = quadrature_nodes(pieces, order)
    if not len(pts):
        return 0.0
    return float(np.dot(f(pts), wts))


def clip_segment(p0, d, t_lo: float, t_hi: float, hps: Sequence[HalfPlane]):
    """Restrict the segment ``p0 + t d``, ``t in [t_lo, t_hi]``, to an intersection of half-planes.

    Returns the endpoint pair or ``None`` if empty.
    """
    for a, b, c in hps:
        f0 = a * p0[0] + b * p0[1] + c
        fd = a * d[0] + b * d[1]
        if abs(fd) < 1e-15:
            if f0 < -1e-12:
                return None
            continue
        t = -f0 / fd
        if fd > 0:
            t_lo = max(t_lo, t)
        else:
            t_hi = min(t_hi, t)
        if t_lo > t_hi:
            return None
    if not (np.isfinite(t_lo) and np.isfinite(t_hi)):
        return None
    a = np.asarray(p0, dtype=float)
    return a + t_lo * np.asarray(d, dtype=float), a + t_hi * np.asarray(d, dtype=float)


def polygon_halfplanes(poly) -> list[HalfPlane]:
    """Inward half-planes of a counter-clockwise convex polygon."""
    poly = np.asarray(poly, dtype=float)
    out = []
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        ex, ey = q - p
        # left side of the directed edge is inside
        out.append((-ey, ex, ey * p[0] - ex * p[1]))
    return out
