"""Support of the eigenvalue distribution: Horn inequalities and the n=3 polygon.

Every linear constraint is stored as ``(name, coeffs, rhs)`` meaning
``coeffs . gamma <= rhs``; its slack is ``rhs - coeffs . gamma``.  A verdict
reports the smallest slack as ``margin``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geometry
from .core_types import HornError, Spectrum

__all__ = [
    "SupportVerdict",
    "PolygonN3",
    "HORN_N4_IJK",
    "check_horn",
    "check_horn_n2",
    "check_horn_n3",
    "check_horn_n4",
    "horn_constraints",
    "polygon_n3",
    "xi_interval",
    "default_tol",
    "horn_margins",
    "weyl_bounds",
    "xi_length",
]


@dataclass(frozen=True)
class SupportVerdict:
    inside: bool
    margin: float
    active: tuple[str, ...] = ()

    @property
    def boundary(self) -> bool:
        return self.inside and bool(self.active)


def _spectrum(x, n: int | None = None) -> Spectrum:
    s = x if isinstance(x, Spectrum) else Spectrum(x)
    if n is not None and s.n != n:
        raise HornError(f"expected a spectrum of length {n}, got {s.n}")
    return s


def _arr(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, Spectrum) else x, dtype=float)


def default_tol(*spectra) -> float:
    """Boundary tolerance ``1e-9`` times the scale of the inputs."""
    scale = max([1.0] + [float(np.max(np.abs(_arr(s)))) for s in spectra])
    return 1e-9 * scale


# The (*IJK) inequalities for n = 4: sum_K gamma <= sum_I alpha + sum_J beta.
# Indices are 1-based, one row per inequality, in the order of the printed table.
HORN_N4_IJK: tuple[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]], ...] = (
    ((1,), (1,), (1,)),
    ((1,), (2,), (2,)),
    ((1,), (3,), (3,)),
    ((1,), (4,), (4,)),
    ((2,), (1,), (2,)),
    ((2,), (2,), (3,)),
    ((2,), (3,), (4,)),
    ((3,), (1,), (3,)),
    ((3,), (2,), (4,)),
    ((4,), (1,), (4,)),
    ((1, 2), (1, 2), (1, 2)),
    ((1, 2), (1, 3), (1, 3)),
    ((1, 2), (1, 4), (1, 4)),
    ((1, 2), (2, 3), (2, 3)),
    ((1, 2), (2, 4), (2, 4)),
    ((1, 2), (3, 4), (3, 4)),
    ((1, 3), (1, 2), (1, 3)),
    ((1, 3), (1, 3), (1, 4)),
    ((1, 3), (1, 3), (2, 3)),
    ((1, 3), (1, 4), (2, 4)),
    ((1, 3), (2, 3), (2, 4)),
    ((1, 3), (2, 4), (3, 4)),
    ((1, 4), (1, 2), (1, 4)),
    ((1, 4), (1, 3), (2, 4)),
    ((1, 4), (1, 4), (3, 4)),
    ((2, 3), (1, 2), (2, 3)),
    ((2, 3), (1, 3), (2, 4)),
    ((2, 3), (2, 3), (3, 4)),
    ((2, 4), (1, 2), (2, 4)),
    ((2, 4), (1, 3), (3, 4)),
    ((3, 4), (1, 2), (3, 4)),
    ((1, 2, 3), (1, 2, 3), (1, 2, 3)),
    ((1, 2, 3), (1, 2, 4), (1, 2, 4)),
    ((1, 2, 3), (1, 3, 4), (1, 3, 4)),
    ((1, 2, 3), (2, 3, 4), (2, 3, 4)),
    ((1, 2, 4), (1, 2, 3), (1, 2, 4)),
    ((1, 2, 4), (1, 2, 4), (1, 3, 4)),
    ((1, 2, 4), (1, 3, 4), (2, 3, 4)),
    ((1, 3, 4), (1, 2, 3), (1, 3, 4)),
    ((1, 3, 4), (1, 2, 4), (2, 3, 4)),
    ((2, 3, 4), (1, 2, 3), (2, 3, 4)),
)


def _name(prefix: str, idx: Sequence[int]) -> str:
    return "+".join(f"{prefix}{i}" for i in idx)


def _ijk_constraints(a: np.ndarray, b: np.ndarray, table) -> list:
    n = len(a)
    rows = []
    for I, J, K in table:
        coeffs = np.zeros(n)
        coeffs[[k - 1 for k in K]] = 1.0
        rhs = a[[i - 1 for i in I]].sum() + b[[j - 1 for j in J]].sum()
        rows.append((f"{_name('g', K)}<={_name('a', I)}+{_name('b', J)}", coeffs, rhs))
    return rows


def _ordering_constraints(n: int) -> list:
    rows = []
    for i in range(n - 1):
        coeffs = np.zeros(n)
        coeffs[i + 1], coeffs[i] = 1.0, -1.0
        rows.append((f"g{i + 2}<=g{i + 1}", coeffs, 0.0))
    return rows


def _n3_constraints(a: np.ndarray, b: np.ndarray) -> list:
    """The min/max system for n = 3, one row per term of each min or max."""
    rows = []

    def add(k, i, j, upper):
        coeffs = np.zeros(3)
        coeffs[k - 1] = 1.0 if upper else -1.0
        rhs = a[i - 1] + b[j - 1]
        op = "<=" if upper else ">="
        rows.append((f"g{k}{op}a{i}+b{j}", coeffs, rhs if upper else -rhs))

    add(3, 3, 3, False)
    for i, j in ((1, 3), (2, 2), (3, 1)):
        add(3, i, j, True)
    for i, j in ((2, 3), (3, 2)):
        add(2, i, j, False)
    for i, j in ((1, 2), (2, 1)):
        add(2, i, j, True)
    for i, j in ((1, 3), (2, 2), (3, 1)):
        add(1, i, j, False)
    add(1, 1, 1, True)
    return rows


def horn_constraints(alpha, beta, ordered: bool = True) -> list:
    """Linear inequality system ``coeffs . gamma <= rhs`` cutting out the support (n = 2, 3, 4)."""
    a, b = _arr(alpha), _arr(beta)
    n = len(a)
    if len(b) != n:
        raise HornError("alpha and beta must have the same length")
    if n == 2:
        rows = [
            ("g1<=a1+b1", np.array([1.0, 0.0]), a[0] + b[0]),
            ("g1>=a1+b2", np.array([-1.0, 0.0]), -(a[0] + b[1])),
            ("g1>=a2+b1", np.array([-1.0, 0.0]), -(a[1] + b[0])),
            ("g2>=a2+b2", np.array([0.0, -1.0]), -(a[1] + b[1])),
        ]
    elif n == 3:
        rows = _n3_constraints(a, b)
    elif n == 4:
        rows = _ijk_constraints(a, b, HORN_N4_IJK)
    else:
        raise HornError(f"Horn systems are tabulated for n = 2, 3, 4; got n = {n}")
    if ordered:
        rows += _ordering_constraints(n)
    return rows


def _verdict(rows, gamma: np.ndarray, trace_gap: float, tol: float) -> SupportVerdict:
    slacks = [(name, float(rhs - coeffs @ gamma)) for name, coeffs, rhs in rows]
    margin = min(s for _, s in slacks)
    # the trace identity is an equality: it only lowers the margin when broken
    if abs(trace_gap) > tol:
        margin = min(margin, -abs(trace_gap))
    active = tuple(name for name, s in slacks if abs(s) <= tol)
    return SupportVerdict(margin >= -tol, margin, active)


def check_horn_n2(alpha, beta, gamma12: float, tol: float | None = None) -> SupportVerdict:
    """Gap test: ``|a12 - b12| <= |gamma12| <= a12 + b12`` (either sign of gamma12)."""
    a, b = _spectrum(alpha, 2), _spectrum(beta, 2)
    a12, b12 = a[0] - a[1], b[0] - b[1]
    tol = default_tol(a, b) if tol is None else tol
    g = abs(float(gamma12))
    slacks = {"lower": g - abs(a12 - b12), "upper": a12 + b12 - g}
    margin = min(slacks.values())
    active = tuple(k for k, s in slacks.items() if abs(s) <= tol)
    return SupportVerdict(margin >= -tol, margin, active)


def _check(alpha, beta, gamma, n: int, tol: float | None) -> SupportVerdict:
    a, b = _spectrum(alpha, n), _spectrum(beta, n)
    g = _arr(gamma)
    if len(g) != n:
        raise HornError(f"gamma must have length {n}")
    tol = default_tol(a, b, g) if tol is None else tol
    trace_gap = g.sum() - a.array.sum() - b.array.sum()
    return _verdict(horn_constraints(a, b), g, trace_gap, tol)


def check_horn_n3(alpha, beta, gamma, tol: float | None = None) -> SupportVerdict:
    """Six min/max bounds on the ordered gamma, plus ordering and the trace identity."""
    return _check(alpha, beta, gamma, 3, tol)


def check_horn_n4(alpha, beta, gamma, tol: float | None = None) -> SupportVerdict:
    """The 41 (*IJK) inequalities, ordering and trace for n = 4."""
    return _check(alpha, beta, gamma, 4, tol)


def check_horn(alpha, beta, gamma, tol: float | None = None) -> SupportVerdict:
    """Dispatch on n = 2, 3, 4 (``gamma`` is the full ordered multiplet)."""
    g = _arr(gamma)
    if len(g) == 2:
        a, b = _spectrum(alpha, 2), _spectrum(beta, 2)
        tol = default_tol(a, b, g) if tol is None else tol
        v = check_horn_n2(a, b, g[0] - g[1], tol)
        trace_gap = g.sum() - a.array.sum() - b.array.sum()
        if g[0] < g[1] - tol:
            return SupportVerdict(False, min(v.margin, g[0] - g[1]), v.active)
        if abs(trace_gap) > tol:
            return SupportVerdict(False, min(v.margin, -abs(trace_gap)), v.active)
        return v
    if len(g) == 3:
        return check_horn_n3(alpha, beta, g, tol)
    if len(g) == 4:
        return check_horn_n4(alpha, beta, g, tol)
    raise HornError(f"no Horn system for n = {len(g)}")


def horn_margins(alpha, beta, gammas: np.ndarray) -> np.ndarray:
    """Vectorized smallest slack of the ordered Horn system for rows of ``gammas``.

    The trace identity is not included; callers pass on-plane points.
    """
    rows = horn_constraints(alpha, beta)
    coeffs = np.array([r[1] for r in rows])
    rhs = np.array([r[2] for r in rows])
    return (rhs[None, :] - np.asarray(gammas) @ coeffs.T).min(axis=1)


# --------------------------------------------------------------------------
# n = 3 polygon and honeycomb interval
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonN3:
    """Support of the ordered ``(gamma_1, gamma_2)`` for n = 3, counter-clockwise."""

    vertices: np.ndarray
    edges: tuple[str, ...]
    trace: float = field(default=0.0)

    @property
    def area(self) -> float:
        return geometry.polygon_area(self.vertices)

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        return geometry.contains(self.vertices, pts, tol)

    @property
    def halfplanes(self):
        return geometry.polygon_halfplanes(self.vertices)

    def bbox(self) -> tuple[float, float, float, float]:
        v = self.vertices
        return float(v[:, 0].min()), float(v[:, 0].max()), float(v[:, 1].min()), float(v[:, 1].max())

    def to_csv(self) -> str:
        """Closed ring of vertices, ``gamma1,gamma2`` rows after a header."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma1", "gamma2"])
        for x, y in list(self.vertices) + [self.vertices[0]]:
            w.writerow([repr(float(x)), repr(float(y))])
        return buf.getvalue()


def n3_halfplanes(alpha, beta) -> list[tuple[str, tuple[float, float, float]]]:
    """Horn constraints for n = 3 as half-planes in the ``(gamma_1, gamma_2)`` chart."""
    a, b = _arr(alpha), _arr(beta)
    trace = a.sum() + b.sum()
    out = []
    for name, coeffs, rhs in horn_constraints(a, b):
        # coeffs . (g1, g2, T - g1 - g2) <= rhs
        c1 = coeffs[0] - coeffs[2]
        c2 = coeffs[1] - coeffs[2]
        c0 = rhs - coeffs[2] * trace
        out.append((name, (-c1, -c2, c0)))
    return out


def polygon_n3(alpha, beta) -> PolygonN3:
    """Vertex enumeration of the n = 3 support in the ``(gamma_1, gamma_2)`` plane."""
    a, b = _spectrum(alpha, 3), _spectrum(beta, 3)
    A, B = a.array, b.array
    lo1, hi1 = A[2] + B[2], A[0] + B[0]
    pad = 1.0 + (hi1 - lo1)
    verts = geometry.rectangle(lo1 - pad, hi1 + pad, lo1 - pad, hi1 + pad)
    labels = ["box"] * 4
    for name, hp in n3_halfplanes(A, B):
        verts, labels = geometry.clip_labeled(verts, labels, hp, name)
        if len(verts) < 3:
            break
    # the sorted pairwise sums always satisfy Horn: guard against numerical collapse
    mid = np.sort(A + B)[::-1]
    if len(verts) < 3 or "box" in labels:
        raise HornError(f"support polygon is empty or unbounded for alpha={a.values}, beta={b.values}")
    poly = PolygonN3(np.asarray(verts), tuple(labels), trace=float(A.sum() + B.sum()))
    assert check_horn_n3(A, B, mid).inside
    return poly


def xi_interval(alpha, beta, gamma) -> tuple[float, float]:
    """Range of the free honeycomb parameter for n = 3; empty when ``lo > hi``."""
    a, b, g = _arr(alpha), _arr(beta), _arr(gamma)
    a1, a2, a3 = a
    b1, b2, b3 = b
    g1, g2, g3 = g
    lo = max(a1 - g1 + g2, g3 - b3, a2, -b2 + g2, a1 + a3 + b1 - g1, a1 + a2 + b2 - g1)
    hi = min(a1, -b3 + g2, a1 + a2 + b1 - g1)
    return float(lo), float(hi)


def xi_length(alpha, beta, gammas: np.ndarray) -> np.ndarray:
    """Vectorized ``max(hi - lo, 0)`` for rows of ``gammas`` (shape ``(k, 3)``)."""
    a, b = _arr(alpha), _arr(beta)
    a1, a2, a3 = a
    b1, b2, b3 = b
    g = np.asarray(gammas, dtype=float)
    g1, g2, g3 = g[..., 0], g[..., 1], g[..., 2]
    lo = np.max(np.stack(np.broadcast_arrays(
        a1 - g1 + g2, g3 - b3, a2 + 0 * g1, -b2 + g2, a1 + a3 + b1 - g1, a1 + a2 + b2 - g1)), axis=0)
    hi = np.min(np.stack(np.broadcast_arrays(a1 + 0 * g1, -b3 + g2, a1 + a2 + b1 - g1)), axis=0)
    return np.maximum(hi - lo, 0.0)


def weyl_bounds(alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate bounds on the ordered gamma from Weyl's inequalities (any n).

    ``gamma_k <= min_{i+j=k+1} (alpha_i + beta_j)`` and
    ``gamma_k >= max_{i+j=k+n} (alpha_i + beta_j)`` (1-based indices).
    """
    a, b = _arr(alpha), _arr(beta)
    n = len(a)
    s = a[:, None] + b[None, :]
    idx = np.add.outer(np.arange(n), np.arange(n))
    hi = np.array([s[idx == k].min() for k in range(n)])
    lo = np.array([s[idx == k + n - 1].max() for k in range(n)])
    return lo, hi
