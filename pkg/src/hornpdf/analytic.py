"""Closed-form kernels, orbital integrals and assembled densities.

Conventions used throughout: ``sign(0) = 0`` inside kernel sums and interval
indicators take the value 1/2 at their end points.  Hermitian densities are
taken with respect to ``d gamma_1 ... d gamma_{n-1}``, ``gamma_n`` being fixed by
the trace.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import geometry
from .core_types import (
    DegenerateSpectrumError,
    HornError,
    SkewGroup,
    SkewSpectrum,
    Spectrum,
    UnsupportedCaseError,
    kappa_hat,
    prefactor_hermitian,
    vandermonde,
    vandermonde_O,
)
from .support import (
    check_horn,
    default_tol,
    horn_margins,
    polygon_n3,
)

__all__ = [
    "DensityValue",
    "KernelValue",
    "Atoms",
    "Segment",
    "indicator",
    "j2_values",
    "j3_values",
    "j3_sum",
    "j3_closed",
    "j4_values",
    "j_values",
    "j_kernel",
    "hermitian_density",
    "pdf_hermitian",
    "symmetric_n2_density",
    "symmetric_n2_cdf",
    "pdf_symmetric_n2",
    "pdf_skew",
    "skew_density",
    "hciz_unitary",
    "hc_orthogonal",
    "break_lines_n3",
    "enhancement_lines_n3",
]

INTERIOR, BOUNDARY, OUTSIDE = "interior", "boundary", "outside"


@dataclass(frozen=True)
class DensityValue:
    """Density at a point, with the support region and the coordinate chart.

    ``singular`` marks an integrable singularity; ``value`` is then ``inf``.
    """

    value: float
    region: str
    chart: str
    singular: bool = False

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class KernelValue:
    value: float
    derivative_break: bool

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class Atoms:
    """A discrete distribution: point masses ``weights`` at ``points``."""

    points: tuple[float, ...]
    weights: tuple[float, ...]

    def total(self) -> float:
        return float(sum(self.weights))


class Segment(NamedTuple):
    start: tuple[float, float]
    end: tuple[float, float]
    label: str

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


def _spec(x, n: int | None = None) -> Spectrum:
    s = x if isinstance(x, Spectrum) else Spectrum(x)
    if n is not None and s.n != n:
        raise HornError(f"expected a spectrum of length {n}, got {s.n}")
    return s


def _vals(x) -> np.ndarray:
    return np.asarray(x.values if hasattr(x, "values") else x, dtype=float)


def indicator(x, lo, hi) -> np.ndarray:
    """``1_(lo, hi)`` with value 1/2 at either end point."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (np.sign(x - lo) - np.sign(x - hi))


# --------------------------------------------------------------------------
# J kernels
# --------------------------------------------------------------------------

def _perm_sign(p) -> int:
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


@lru_cache(maxsize=8)
def _perm_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(n))))
    signs = np.array([_perm_sign(p) for p in perms], dtype=float)
    return perms, signs


@lru_cache(maxsize=64)
def _partial_sums(a: tuple, b: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Partial sums ``sum_{k<=j} a_P(k) + b_P'(k)`` for all ``P, P'`` and the product signs."""
    n = len(a)
    perms, signs = _perm_table(n)
    ca = np.cumsum(np.asarray(a)[perms], axis=1)[:, : n - 1]
    cb = np.cumsum(np.asarray(b)[perms], axis=1)[:, : n - 1]
    c = (ca[:, None, :] + cb[None, :, :]).reshape(-1, n - 1)
    s = (signs[:, None] * signs[None, :]).ravel()
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


def _a_terms(a: np.ndarray, b: np.ndarray, g: np.ndarray, chunk: slice):
    """``A_j(P, P')`` for ``j = 1..n-1``, shape ``(k, terms, n-1)``."""
    n = len(a)
    c, s = _partial_sums(tuple(a), tuple(b))
    gc = g[chunk]
    cg = np.cumsum(gc, axis=1)[:, : n - 1]
    excess = (a.sum() + b.sum() - gc.sum(axis=1))[:, None] * (np.arange(1, n) / n)[None, :]
    return c[None, :, :] - (cg + excess)[:, None, :], s


def j2_values(a12, b12, g12) -> np.ndarray:
    """``J_2 = 1_I - 1_{-I}`` with ``I = (|a12 - b12|, a12 + b12)``."""
    e = np.sign
    g12 = np.asarray(g12, dtype=float)
    return 0.5 * (e(g12 - a12 + b12) + e(g12 + a12 - b12) - e(g12 - a12 - b12) - e(g12 + a12 + b12))


def j3_sum(alpha, beta, gammas, chunk: int = 4096) -> np.ndarray:
    """The 72-term signed sum ``(1/4) sum eps_P eps_P' sign(A1) (|A2| - |A2 - A1|)``."""
    a, b = _vals(alpha), _vals(beta)
    g = np.atleast_2d(np.asarray(gammas, dtype=float))
    out = np.empty(len(g))
    for s0 in range(0, len(g), chunk):
        sl = slice(s0, s0 + chunk)
        A, s = _a_terms(a, b, g, sl)
        a1, a2 = A[..., 0], A[..., 1]
        out[sl] = (np.sign(a1) * (np.abs(a2) - np.abs(a2 - a1))) @ s / 4
    return out


def _psi(a, b, c) -> np.ndarray:
    return np.select(
        [(a >= 0) & (b < 0), (c >= 0) & (a < 0), (b >= 0) & (c < 0)],
        [a - b, c - a, b - c],
        default=0.0,
    )


def _psi_args(a: np.ndarray, b: np.ndarray, g: np.ndarray):
    return g[:, 1] - a[2] - b[0], g[:, 0] - a[0] - b[1], g[:, 2] - a[1] - b[2]


def j3_closed(alpha, beta, gammas) -> np.ndarray:
    """Four-term closed form, valid for ordered ``gamma`` inside the support."""
    a, b = _vals(alpha), _vals(beta)
    g = np.atleast_2d(np.asarray(gammas, dtype=float))
    lin = (a[0] - a[2] + b[0] - b[2] + g[:, 0] - g[:, 2]) / 6
    return (lin - 0.5 * np.abs(a[1] + b[1] - g[:, 1])
            - _psi(*_psi_args(a, b, g)) / 3 - _psi(*_psi_args(b, a, g)) / 3)


def j3_values(alpha, beta, gammas) -> np.ndarray:
    """``J_3``: closed form where ``gamma`` is ordered and inside, signed sum elsewhere."""
    a, b = _vals(alpha), _vals(beta)
    g = np.atleast_2d(np.asarray(gammas, dtype=float))
    ordered = (g[:, 0] >= g[:, 1]) & (g[:, 1] >= g[:, 2])
    inside = ordered & (horn_margins(a, b, g) >= 0)
    out = np.empty(len(g))
    if inside.any():
        out[inside] = j3_closed(a, b, g[inside])
    if (~inside).any():
        out[~inside] = j3_sum(a, b, g[~inside])
    return out


def j4_values(alpha, beta, gammas, chunk: int = 2000) -> np.ndarray:
    """The 576-term sum over ``S_4 x S_4`` of signed cubic terms in ``A_1, A_2, A_3``."""
    a, b = _vals(alpha), _vals(beta)
    g = np.atleast_2d(np.asarray(gammas, dtype=float))
    out = np.empty(len(g))
    e = np.sign
    for s0 in range(0, len(g), chunk):
        sl = slice(s0, s0 + chunk)
        A, s = _a_terms(a, b, g, sl)
        a1, a2, a3 = A[..., 0], A[..., 1], A[..., 2]
        d32 = a3 - a2
        t = e(a1) * (
            e(a2 - a1) / 6 * (np.abs(a3 - a1) ** 3 - np.abs(d32 + a1) ** 3 - np.abs(d32) ** 3 + np.abs(a3) ** 3)
            - e(a2) / 3 * (np.abs(a3) ** 3 - np.abs(d32) ** 3)
            - 0.5 * (np.abs(a2 - a1) - np.abs(a2)) * (np.abs(d32) * d32 + np.abs(a3) * a3)
        )
        out[sl] = t @ s / 8
    return out


def j_values(alpha, beta, gammas) -> np.ndarray:
    """Vectorized ``J_n`` for rows of full ``gamma`` vectors, n = 2, 3, 4."""
    a, b = _vals(alpha), _vals(beta)
    g = np.atleast_2d(np.asarray(gammas, dtype=float))
    n = len(a)
    if n == 2:
        return j2_values(a[0] - a[1], b[0] - b[1], g[:, 0] - g[:, 1])
    if n == 3:
        return j3_values(a, b, g)
    if n == 4:
        return j4_values(a, b, g)
    raise UnsupportedCaseError(f"no closed-form kernel for n = {n}; use Monte Carlo")


def _break_n3(a: np.ndarray, b: np.ndarray, g: np.ndarray, tol: float) -> bool:
    p = np.array([g[0], g[1]])
    for seg in break_lines_n3(a, b, clip=False):
        p0, p1 = np.array(seg.start), np.array(seg.end)
        d = p1 - p0
        t = np.clip(np.dot(p - p0, d) / np.dot(d, d), 0.0, 1.0)
        if np.hypot(*(p - p0 - t * d)) <= tol:
            return True
    return False


def _break_n4(a: np.ndarray, b: np.ndarray, g: np.ndarray, h: float) -> bool:
    """One-sided second differences along each free axis disagree at a break."""
    trace = a.sum() + b.sum()
    pts = []
    for k in range(3):
        for step in (-2, -1, 0, 1, 2):
            free = g[:3].copy()
            free[k] += step * h
            pts.append(np.append(free, trace - free.sum()))
    f = j4_values(a, b, np.array(pts)).reshape(3, 5)
    scale = max(1.0, float(np.abs(f).max()))
    left = (f[:, 2] - 2 * f[:, 1] + f[:, 0]) / h**2
    right = (f[:, 4] - 2 * f[:, 3] + f[:, 2]) / h**2
    # on a smooth cubic piece |right - left| is about 2 h |f'''|
    return bool((np.abs(right - left) > 1e-2 * scale).any())


def j_kernel(n: int, alpha, beta, gamma, tol: float | None = None) -> KernelValue:
    """``J_n(alpha, beta; gamma)`` with a flag for the non-differentiability locus.

    ``gamma`` is the full n-vector and is assumed to satisfy the trace identity.
    For n = 4 the flag comes from finite differences with step ``1e-4`` in
    units of the spectra scale.
    """
    a, b = _spec(alpha, n), _spec(beta, n)
    A, B = a.array, b.array
    g = np.asarray(_vals(gamma), dtype=float)
    if len(g) != n:
        raise HornError(f"gamma must have length {n}")
    tol = default_tol(A, B, g) if tol is None else tol
    value = float(j_values(A, B, g[None])[0])
    if n == 2:
        m, M = abs((A[0] - A[1]) - (B[0] - B[1])), (A[0] - A[1]) + (B[0] - B[1])
        g12 = abs(g[0] - g[1])
        brk = min(abs(g12 - m), abs(g12 - M)) <= tol
    elif n == 3:
        brk = _break_n3(A, B, np.sort(g)[::-1], tol)
    else:
        scale = max(1.0, float(np.abs(np.concatenate([A, B])).max()))
        brk = _break_n4(A, B, np.sort(g)[::-1], 1e-4 * scale)
    return KernelValue(value, bool(brk))


# --------------------------------------------------------------------------
# Hermitian densities
# --------------------------------------------------------------------------

def _full_gamma(alpha, beta, free) -> np.ndarray:
    free = np.atleast_2d(np.asarray(free, dtype=float))
    trace = _vals(alpha).sum() + _vals(beta).sum()
    return np.column_stack([free, trace - free.sum(axis=1)])


def hermitian_density(alpha, beta, free, ordered: bool = False) -> np.ndarray:
    """Vectorized Hermitian density at rows of free coordinates ``(gamma_1..gamma_{n-1})``.

    With ``ordered=True`` the result is the density of the ordered spectrum:
    ``n!`` times the unordered density on the sector ``gamma_1 >= ... >= gamma_n``
    and zero elsewhere.
    """
    a, b = _vals(alpha), _vals(beta)
    n = len(a)
    g = _full_gamma(a, b, free)
    gs = -np.sort(-g, axis=1)
    const = float(prefactor_hermitian(n)) / (vandermonde(a) * vandermonde(b))
    val = const * vandermonde(gs) * j_values(a, b, gs)
    val = np.where(val > 0, val, 0.0)
    if ordered:
        in_sector = np.all(np.diff(g, axis=1) <= 0, axis=1)
        val = np.where(in_sector, math.factorial(n) * val, 0.0)
    return val


def _chart_hermitian(n: int) -> str:
    if n == 2:
        return "gamma_1 (gamma_2 = trace - gamma_1)"
    free = ", ".join(f"gamma_{i}" for i in range(1, n))
    return f"({free}) with gamma_{n} = trace - sum"


def pdf_hermitian(alpha, beta, gamma_free, ordered: bool = False) -> DensityValue:
    """Density of the eigenvalues of ``A + U B U^dagger`` at one point.

    ``gamma_free`` has length n - 1; the last eigenvalue is fixed by the trace.
    The default is the density of unordered eigenvalues.
    """
    n = len(_vals(alpha))
    if n not in (2, 3, 4):
        raise UnsupportedCaseError(f"no closed-form Hermitian density for n = {n}; use Monte Carlo")
    a, b = _spec(alpha, n), _spec(beta, n)
    free = np.asarray(gamma_free, dtype=float).ravel()
    if len(free) != n - 1:
        raise HornError(f"gamma_free must have length {n - 1}")
    value = float(hermitian_density(a, b, free[None], ordered)[0])
    g = _full_gamma(a, b, free[None])[0]
    gs = np.sort(g)[::-1]
    verdict = check_horn(a, b, gs)
    if not verdict.inside:
        region, value = OUTSIDE, 0.0
    elif verdict.active:
        region = BOUNDARY
    else:
        region = INTERIOR
    return DensityValue(value, region, _chart_hermitian(n))


# --------------------------------------------------------------------------
# Real symmetric, n = 2
# --------------------------------------------------------------------------

def _gap_bounds(alpha, beta) -> tuple[float, float]:
    a, b = _vals(alpha), _vals(beta)
    a12, b12 = a[0] - a[1], b[0] - b[1]
    return abs(a12 - b12), a12 + b12


def symmetric_n2_density(m: float, M: float, g) -> np.ndarray:
    """``(2/pi) g / sqrt((M^2 - g^2)(g^2 - m^2))`` on ``(m, M)``, zero outside.

    End points where the formula diverges give ``inf``.
    """
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if m == 0:
            val = (2 / np.pi) / np.sqrt(M * M - g * g)
        else:
            val = (2 / np.pi) * g / np.sqrt((M * M - g * g) * (g * g - m * m))
    inside = (g > m) & (g < M)
    out = np.where(inside, val, 0.0)
    out = np.where(g == M, np.inf, out)
    if m > 0:
        out = np.where(g == m, np.inf, out)
    else:
        out = np.where(g == 0, 2 / (np.pi * M), out)
    return out


def symmetric_n2_cdf(m: float, M: float, g) -> np.ndarray:
    """Distribution function of the gap for the real symmetric n = 2 case."""
    g = np.clip(np.asarray(g, dtype=float), m, M)
    arg = np.clip((2 * g * g - M * M - m * m) / (M * M - m * m), -1.0, 1.0)
    return 0.5 + np.arcsin(arg) / np.pi


def pdf_symmetric_n2(alpha, beta, gamma12: float) -> DensityValue:
    """Density of the gap ``gamma_1 - gamma_2 >= 0`` for ``A + O B O^T``, O in O(2)."""
    a, b = _spec(alpha, 2), _spec(beta, 2)
    m, M = _gap_bounds(a, b)
    g = float(gamma12)
    tol = default_tol(a, b)
    chart = "gamma_12 = gamma_1 - gamma_2 >= 0"
    at_top = abs(g - M) <= tol
    at_bottom = abs(g - m) <= tol
    if g < m - tol or g > M + tol:
        return DensityValue(0.0, OUTSIDE, chart)
    if at_top or (at_bottom and m > 0):
        return DensityValue(math.inf, BOUNDARY, chart, singular=True)
    if at_bottom:
        return DensityValue(2 / (np.pi * M), BOUNDARY, chart)
    return DensityValue(float(symmetric_n2_density(m, M, g)), INTERIOR, chart)


# --------------------------------------------------------------------------
# Real skew-symmetric
# --------------------------------------------------------------------------

def _skew_group(group) -> SkewGroup:
    if isinstance(group, SkewGroup):
        return group
    return SkewGroup(group)


def _sum_diff_intervals(a: np.ndarray, b: np.ndarray, special: bool):
    """Terms ``(weight, I, I')`` of the m = 2 bracket; ``I`` acts on ``s``, ``I'`` on ``t``."""
    if special:
        combos = [(1, 1)]
    else:
        combos = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    out = []
    for e, f in combos:
        sa, sb = a[0] + e * a[1], b[0] + f * b[1]
        da, db = a[0] - e * a[1], b[0] - f * b[1]
        out.append((1.0 / len(combos), (abs(sa - sb), sa + sb), (abs(da - db), da + db)))
    return out


def skew_density(alpha, beta, gammas, group, canonical: bool = False) -> np.ndarray:
    """Vectorized skew density for ``m = 1`` (odd n) and ``m = 2`` (n = 4).

    ``gammas`` has one row per point with ``m`` columns.  With ``canonical``
    the density is restricted to canonical block eigenvalues (positive and
    decreasing, the last one signed for SO(4)) and rescaled to integrate to 1.
    """
    grp = _skew_group(group)
    a, b = _vals(alpha), _vals(beta)
    g = np.asarray(gammas, dtype=float)
    if g.ndim == 1:
        g = g[:, None] if len(a) == 1 else g[None, :]
    m = len(a)
    if grp.odd and m == 1:
        lo, hi = abs(a[0] - b[0]), abs(a[0] + b[0])
        x = g[:, 0]
        val = 0.25 * np.abs(x) / abs(a[0] * b[0]) * (indicator(x, lo, hi) + indicator(x, -hi, -lo))
        if canonical:
            val = np.where(x >= 0, 2 * val, 0.0)
        return val
    if not grp.odd and m == 2:
        dga = vandermonde_O(a, "even") * vandermonde_O(b, "even")
        s, t = g[:, 0] + g[:, 1], g[:, 0] - g[:, 1]
        bracket = np.zeros(len(g))
        for w, (i0, i1), (k0, k1) in _sum_diff_intervals(a, b, grp.special):
            bracket += w * (indicator(s, i0, i1) - indicator(s, -i1, -i0)) * (
                indicator(t, k0, k1) - indicator(t, -k1, -k0))
        val = vandermonde_O(g, "even") / (8 * dga) * bracket
        if canonical:
            if grp.special:
                chamber = (t >= 0) & (s >= 0)
                val = np.where(chamber, 4 * val, 0.0)
            else:
                chamber = (t >= 0) & (g[:, 1] >= 0)
                val = np.where(chamber, 8 * val, 0.0)
        return val
    raise UnsupportedCaseError(
        f"no closed-form skew density for {grp.value} with m = {m}; use Monte Carlo")


def _skew_atoms(a: float, b: float, special: bool, canonical: bool) -> Atoms:
    if special:
        return Atoms((a + b,), (1.0,))
    if canonical:
        pts = sorted({abs(a + b), abs(a - b)})
        if len(pts) == 1:
            return Atoms((pts[0],), (1.0,))
        return Atoms(tuple(pts), (0.5, 0.5))
    pts = [a + b, a - b, -a + b, -a - b]
    return Atoms(tuple(pts), (0.25,) * 4)


def pdf_skew(alpha, beta, gamma=None, group=None, canonical: bool = False):
    """Density of block eigenvalues for ``A + O B O^T`` with real skew-symmetric A, B.

    For n = 2 the distribution is atomic and an :class:`Atoms` is returned
    (``gamma`` is ignored).  For n = 3 and n = 4 a :class:`DensityValue` is
    returned.  ``group`` defaults to the group of ``alpha``.
    """
    if group is None:
        if not isinstance(alpha, SkewSpectrum):
            raise HornError("pass a group or SkewSpectrum inputs")
        group = alpha.group
    grp = _skew_group(group)
    a = alpha if isinstance(alpha, SkewSpectrum) else SkewSpectrum(alpha, grp)
    b = beta if isinstance(beta, SkewSpectrum) else SkewSpectrum(beta, grp)
    if a.m != b.m:
        raise HornError("alpha and beta must have the same number of blocks")
    if a.n not in (2, 3, 4):
        raise UnsupportedCaseError(
            f"no closed-form skew density for n = {a.n}; use Monte Carlo sampling")
    if a.n == 2:
        return _skew_atoms(a[0], b[0], grp.special, canonical)
    if gamma is None:
        raise HornError("gamma is required for n = 3, 4")
    g = np.atleast_1d(np.asarray(_vals(gamma), dtype=float))
    if len(g) != a.m:
        raise HornError(f"gamma must have {a.m} entries")
    value = float(skew_density(a.array, b.array, g[None], grp, canonical)[0])
    region = _skew_region(a.array, b.array, g, grp, value, default_tol(a.array, b.array, g))
    if a.m == 1:
        chart = "gamma (block eigenvalue)" + (", gamma >= 0" if canonical else ", both signs")
    else:
        chart = "(gamma_1, gamma_2) block eigenvalues" + (", canonical chamber" if canonical else "")
    return DensityValue(value if region != OUTSIDE else 0.0, region, chart)


def _skew_region(a, b, g, grp: SkewGroup, value: float, tol: float) -> str:
    if len(a) == 1:
        ends = [abs(a[0] - b[0]), abs(a[0] + b[0])]
        near = min(abs(abs(g[0]) - e) for e in ends) <= tol
    else:
        s, t = g[0] + g[1], g[0] - g[1]
        ends = []
        for _, (i0, i1), (k0, k1) in _sum_diff_intervals(a, b, grp.special):
            ends += [abs(abs(s) - i0), abs(abs(s) - i1), abs(abs(t) - k0), abs(abs(t) - k1)]
        near = min(ends) <= tol or abs(g[0] ** 2 - g[1] ** 2) <= tol
    if near:
        # on an edge of the support only if some neighbourhood point carries mass
        return BOUNDARY if value > 0 or _mass_nearby(a, b, g, grp, tol) else OUTSIDE
    return INTERIOR if value > 0 else OUTSIDE


def _mass_nearby(a, b, g, grp, tol) -> bool:
    h = max(10 * tol, 1e-7)
    offs = [np.array(o) * h for o in itertools.product((-1, 0, 1), repeat=len(g))]
    pts = np.array([g + o for o in offs])
    return bool((np.abs(skew_density(a, b, pts, grp)) > 0).any())


# --------------------------------------------------------------------------
# Orbital integrals
# --------------------------------------------------------------------------

def _require_distinct(x: np.ndarray, what: str) -> None:
    d = np.abs(x[:, None] - x[None, :])[np.triu_indices(len(x), 1)]
    if len(d) and d.min() <= 1e-12 * max(1.0, float(np.abs(x).max())):
        raise DegenerateSpectrumError(f"{what} has repeated entries: {x}")


def hciz_unitary(alpha, x) -> complex:
    """Unitary orbital integral ``int dU exp(i tr(X U diag(alpha) U^dagger))``.

    ``X = diag(x)``; both vectors need pairwise distinct entries.
    """
    a, xv = _vals(alpha), np.asarray(x, dtype=float).ravel()
    n = len(a)
    if len(xv) != n:
        raise HornError("alpha and x must have the same length")
    _require_distinct(a, "alpha")
    _require_distinct(xv, "x")
    kh = float(kappa_hat("Hermitian", n))
    det = np.linalg.det(np.exp(1j * np.outer(xv, a)))
    phase = (-1j) ** (n * (n - 1) // 2)
    return complex(kh * phase * det / (vandermonde(xv) * vandermonde(a)))


def hc_orthogonal(alpha, beta, group) -> float:
    """Orthogonal orbital integral ``int dO exp(tr(A O B O^T))`` for canonical skew A, B.

    ``group`` selects O(2m), SO(2m) or the odd case (O and SO agree there).
    """
    grp = _skew_group(group)
    a = alpha if isinstance(alpha, SkewSpectrum) else SkewSpectrum(alpha, grp)
    b = beta if isinstance(beta, SkewSpectrum) else SkewSpectrum(beta, grp)
    A, B = a.array, b.array
    m = len(A)
    if len(B) != m:
        raise HornError("alpha and beta must have the same number of blocks")
    x = 2 * np.outer(A, B)
    if grp.odd:
        num = float(kappa_hat("SkewOdd", m)) * np.linalg.det(np.sinh(x))
        return float(num / (vandermonde_O(A, "odd") * vandermonde_O(B, "odd")))
    kh = float(kappa_hat("SkewEven", m))
    den = vandermonde_O(A, "even") * vandermonde_O(B, "even")
    if grp is SkewGroup.O_EVEN:
        return float(kh * np.linalg.det(np.cosh(x)) / den)
    total = 0.0
    for eps in itertools.product((1, -1), repeat=m):
        if np.prod(eps) < 0:
            continue
        total += np.linalg.det(np.exp(-np.asarray(eps)[:, None] * x))
    return float(kh / 2 ** (m - 1) * total / den)


# --------------------------------------------------------------------------
# Break lines, n = 3
# --------------------------------------------------------------------------

_FAR = 1e6


def _rays(a: np.ndarray, b: np.ndarray, x: str, y: str):
    """The three rays bounding the sectors of psi, as (origin, direction, label)."""
    trace = a.sum() + b.sum()
    v = np.array([a[0] + b[1], a[2] + b[0]])
    c_line = trace - a[1] - b[2]
    return [
        (v, np.array([0.0, 1.0]), f"gamma_1 = {x}1+{y}2, gamma_2 >= {x}3+{y}1"),
        (v, np.array([-1.0, 0.0]), f"gamma_2 = {x}3+{y}1, gamma_1 <= {x}1+{y}2"),
        (np.array([v[0], c_line - v[0]]), np.array([1.0, -1.0]),
         f"gamma_1+gamma_2 = {x}1+{x}3+{y}1+{y}2, gamma_1 >= {x}1+{y}2"),
    ]


def break_lines_n3(alpha, beta, clip: bool = True) -> list[Segment]:
    """Lines where ``J_3`` is not differentiable, in the ``(gamma_1, gamma_2)`` plane.

    Six half-lines from the two ``psi`` terms and the line ``gamma_2 = alpha_2 + beta_2``.
    With ``clip`` they are cut to the support polygon; otherwise rays are
    truncated at a large finite length.
    """
    a, b = _vals(alpha), _vals(beta)
    items = []
    for p0, d, lab in _rays(a, b, "a", "b") + _rays(b, a, "b", "a"):
        items.append((p0, d, 0.0, _FAR, lab))
    items.append((np.array([0.0, a[1] + b[1]]), np.array([1.0, 0.0]), -_FAR, _FAR, "gamma_2 = a2+b2"))
    hps = polygon_n3(a, b).halfplanes if clip else []
    out = []
    for p0, d, t0, t1, lab in items:
        seg = geometry.clip_segment(p0, d, t0, t1, hps)
        if seg is None:
            continue
        s = Segment(tuple(map(float, seg[0])), tuple(map(float, seg[1])), lab)
        if s.length > 1e-12:
            out.append(s)
    return out


def enhancement_lines_n3(alpha, beta) -> list[Segment]:
    """Overlay of the seven predicted ridge segments, clipped to the support polygon.

    The list is symmetric under exchanging ``alpha`` and ``beta`` and sorted by
    coordinates so the two orders give the same list.
    """
    a, b = _spec(alpha, 3), _spec(beta, 3)
    segs = break_lines_n3(a.array, b.array)
    canon = []
    for s in segs:
        p, q = sorted([s.start, s.end])
        canon.append(Segment(p, q, s.label))
    unique = {}
    for s in canon:
        unique.setdefault(tuple(round(c, 10) for c in s.start + s.end), s)
    return [unique[k] for k in sorted(unique)]
