"""Monte-Carlo runs, histograms, MC-versus-analytic comparison and normalization checks.

Every ensemble is read in a two-dimensional chart ``(x, y)``:

* Hermitian and symmetric, n >= 3: ``(gamma_1, gamma_2)`` of the ordered spectrum;
* Hermitian and symmetric, n = 2: ``x = gamma_1 - gamma_2``, ``y = 0``;
* skew with one block: ``x = gamma``, ``y = 0``;
* skew with two or more blocks: the first two block eigenvalues.

One-dimensional charts use a single bin in ``y``.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import stats

from . import analytic, geometry
from .core_types import (
    Ensemble,
    EnsembleKind,
    HornError,
    QuadratureError,
    UnsupportedCaseError,
    analytic_table,
    j_normalization,
    vandermonde,
    vandermonde_O,
)
from .sampling import (
    BLOCK_SIZE,
    RngStream,
    _haar_orthogonal_batch,
    _haar_unitary_batch,
    sample_spectra,
    skew_block_matrix,
)
from .support import polygon_n3, weyl_bounds

__all__ = [
    "GridSpec",
    "HistogramGrid",
    "ComparisonReport",
    "QuadratureSpec",
    "CaseModel",
    "RunConfig",
    "case_model",
    "default_grid",
    "run_mc",
    "histogram",
    "compare",
    "normalization_check",
    "hciz_mc",
    "hc_orthogonal_mc",
    "load_batch",
]


# --------------------------------------------------------------------------
# Grids and histograms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Rectangular binning ``[x0, x1] x [y0, y1]`` with ``nx x ny`` bins."""

    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise HornError("grid needs at least one bin per axis")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise HornError("grid ranges must have positive width")

    @property
    def x_edges(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx + 1)

    @property
    def y_edges(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny + 1)

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def bin_area(self) -> float:
        return self.dx * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        xe, ye = self.x_edges, self.y_edges
        return (xe[:-1] + xe[1:]) / 2, (ye[:-1] + ye[1:]) / 2

    def to_list(self) -> list:
        return [self.x0, self.x1, self.nx, self.y0, self.y1, self.ny]

    @classmethod
    def from_list(cls, v) -> "GridSpec":
        return cls(float(v[0]), float(v[1]), int(v[2]), float(v[3]), float(v[4]), int(v[5]))


@dataclass
class HistogramGrid:
    """Binned samples in the chart of an ensemble; out-of-window samples go to ``overflow``."""

    grid: GridSpec
    counts: np.ndarray
    total: int
    overflow: int
    metadata: dict = field(default_factory=dict)

    def density(self) -> np.ndarray:
        return self.counts / (self.total * self.grid.bin_area)

    def fractions(self) -> np.ndarray:
        return self.counts / self.total

    def __eq__(self, other) -> bool:
        if not isinstance(other, HistogramGrid):
            return NotImplemented
        return (self.grid == other.grid and self.total == other.total and self.overflow == other.overflow
                and np.array_equal(self.counts, other.counts) and self.metadata == other.metadata)

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = dict(self.metadata)
        meta.update(total=self.total, overflow=self.overflow, grid=self.grid.to_list())
        for key, value in meta.items():
            buf.write(f"# {key}: {json.dumps(value)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_x_low", "bin_y_low", "count"])
        xe, ye = self.grid.x_edges, self.grid.y_edges
        for i in range(self.grid.nx):
            for j in range(self.grid.ny):
                w.writerow([repr(float(xe[i])), repr(float(ye[j])), int(self.counts[i, j])])
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "HistogramGrid":
        meta = {}
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = json.loads(value)
            elif line.strip():
                rows.append(line)
        try:
            grid = GridSpec.from_list(meta.pop("grid"))
            total, overflow = int(meta.pop("total")), int(meta.pop("overflow"))
        except KeyError as exc:
            raise HornError(f"histogram file lacks metadata field {exc}") from None
        reader = csv.reader(rows)
        header = next(reader)
        if header != ["bin_x_low", "bin_y_low", "count"]:
            raise HornError(f"unexpected histogram header {header}")
        counts = np.zeros((grid.nx, grid.ny), dtype=np.int64)
        xe, ye = grid.x_edges, grid.y_edges
        for xs, ys, c in reader:
            i = int(np.argmin(np.abs(xe[:-1] - float(xs))))
            j = int(np.argmin(np.abs(ye[:-1] - float(ys))))
            counts[i, j] = int(c)
        return cls(grid, counts, total, overflow, meta)

    @classmethod
    def read(cls, path) -> "HistogramGrid":
        return cls.from_csv(Path(path).read_text())


# --------------------------------------------------------------------------
# Per-ensemble chart models
# --------------------------------------------------------------------------

def _cut_lines(segments) -> list:
    """Full lines through break segments, as half-plane triples."""
    out = []
    for s in segments:
        (px, py), (qx, qy) = s.start, s.end
        ex, ey = qx - px, qy - py
        out.append((-ey, ex, ey * px - ex * py))
    return out


class CaseModel:
    """Chart, support geometry and analytic bin masses for one (ensemble, alpha, beta)."""

    def __init__(self, ensemble: Ensemble, alpha, beta):
        self.ensemble = ensemble
        self.alpha_spec = ensemble.spectrum(alpha)
        self.beta_spec = ensemble.spectrum(beta)
        self.alpha = self.alpha_spec.array
        self.beta = self.beta_spec.array
        kind, n = ensemble.kind, ensemble.n
        if ensemble.is_skew:
            self.dim = 1 if ensemble.rank == 1 else 2
            self.chart = "gamma" if self.dim == 1 else "(gamma_1, gamma_2) block eigenvalues"
        else:
            self.dim = 1 if n == 2 else 2
            self.chart = "gamma_1 - gamma_2" if n == 2 else "(gamma_1, gamma_2) ordered"
        self.has_density = ensemble.has_analytic_density
        self.atomic = ensemble.is_skew and n == 2
        self.kind = kind

    # metadata ----------------------------------------------------------
    def metadata(self) -> dict:
        return {
            "ensemble": self.kind.value,
            "n": self.ensemble.n,
            "alpha": [float(v) for v in self.alpha],
            "beta": [float(v) for v in self.beta],
            "chart": self.chart,
        }

    # coordinates -------------------------------------------------------
    def coords(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v = np.atleast_2d(values)
        if self.dim == 1:
            x = v[:, 0] - v[:, 1] if not self.ensemble.is_skew else v[:, 0]
            return x, np.zeros(len(v))
        return v[:, 0], v[:, 1]

    # geometry ----------------------------------------------------------
    def support_bbox(self) -> tuple[float, float, float, float]:
        a, b = self.alpha, self.beta
        if self.ensemble.is_skew:
            if self.atomic:
                pts = analytic.pdf_skew(a, b, group=self.ensemble.skew_group, canonical=True).points
                return min(pts), max(pts), -0.5, 0.5
            if self.ensemble.rank == 1:
                return abs(a[0] - b[0]), abs(a[0] + b[0]), -0.5, 0.5
            if self.has_density:
                rects = self._skew_rects()
                x0 = min((r[0] + r[2]) / 2 for r in rects)
                x1 = max((r[1] + r[3]) / 2 for r in rects)
                y0 = min((r[0] - r[3]) / 2 for r in rects)
                y1 = max((r[1] - r[2]) / 2 for r in rects)
                if not self.ensemble.skew_group.special:
                    y0 = max(y0, 0.0)
                return x0, x1, y0, y1
            top = float(np.abs(a).max() + np.abs(b).max())
            low = -top if self.ensemble.skew_group.special and not self.ensemble.skew_group.odd else 0.0
            return 0.0, top, low, top
        if self.ensemble.n == 2:
            m, M = analytic._gap_bounds(a, b)
            return m, M, -0.5, 0.5
        if self.ensemble.n == 3:
            return polygon_n3(a, b).bbox()
        lo, hi = weyl_bounds(a, b)
        return lo[0], hi[0], lo[1], hi[1]

    def polygon(self):
        if not self.ensemble.is_skew and self.ensemble.n == 3:
            return polygon_n3(self.alpha, self.beta)
        return None

    def overlay_segments(self) -> list:
        if not self.ensemble.is_skew and self.ensemble.n == 3:
            return analytic.enhancement_lines_n3(self.alpha, self.beta)
        return []

    def _skew_rects(self) -> list[tuple[float, float, float, float, float]]:
        """Rectangles ``(s0, s1, t0, t1, weight)`` in ``s = g1 + g2``, ``t = g1 - g2``."""
        special = self.ensemble.skew_group.special
        return [(i0, i1, k0, k1, w)
                for w, (i0, i1), (k0, k1) in analytic._sum_diff_intervals(self.alpha, self.beta, special)]

    # densities ---------------------------------------------------------
    def _require_density(self) -> None:
        if not self.has_density:
            raise UnsupportedCaseError(
                f"no analytic density for {self.kind.value} n={self.ensemble.n}; "
                f"analytic cases are {analytic_table()}; use Monte Carlo")

    def density(self, x, y=None) -> np.ndarray:
        """Density of the chart coordinates (ordered or canonical sector)."""
        self._require_density()
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        y = np.zeros_like(x) if y is None else np.broadcast_to(np.asarray(y, dtype=float), shape).ravel()
        a, b = self.alpha, self.beta
        if self.atomic:
            raise UnsupportedCaseError("the n = 2 skew distribution is atomic; use bin masses")
        if self.ensemble.is_skew:
            pts = x[:, None] if self.dim == 1 else np.column_stack([x, y])
            out = analytic.skew_density(a, b, pts, self.ensemble.skew_group, canonical=True)
        elif self.ensemble.n == 2:
            m, M = analytic._gap_bounds(a, b)
            if self.kind is EnsembleKind.SYMMETRIC_O:
                out = analytic.symmetric_n2_density(m, M, x)
            else:
                out = np.where((x >= m) & (x <= M), x / (2 * (a[0] - a[1]) * (b[0] - b[1])), 0.0)
        elif self.ensemble.n == 3:
            out = analytic.hermitian_density(a, b, np.column_stack([x, y]), ordered=True)
        else:
            out = self._marginal_n4(x, y)
        return out.reshape(shape)

    def _marginal_n4(self, x, y, pieces: int = 8, order: int = 3) -> np.ndarray:
        """Integrate the ordered n = 4 density over ``gamma_3`` at fixed ``(gamma_1, gamma_2)``."""
        a, b = self.alpha, self.beta
        trace = a.sum() + b.sum()
        lo3, hi3 = weyl_bounds(a, b)[0][2], weyl_bounds(a, b)[1][2]
        t, w = np.polynomial.legendre.leggauss(order)
        # gamma_3 in [max((T - g1 - g2)/2, lo3), min(g2, hi3)] keeps gamma_3 >= gamma_4 and gamma_3 <= gamma_2
        lo = np.maximum((trace - x - y) / 2, lo3)
        hi = np.minimum(y, hi3)
        width = np.maximum(hi - lo, 0.0)
        u = (np.arange(pieces)[:, None] + (t[None, :] + 1) / 2) / pieces
        u, wu = u.ravel(), np.tile(w / 2, pieces) / pieces
        g3 = lo[:, None] + width[:, None] * u[None, :]
        free = np.column_stack([np.repeat(x, len(u)), np.repeat(y, len(u)), g3.ravel()])
        vals = analytic.hermitian_density(a, b, free, ordered=True).reshape(len(x), len(u))
        return (vals @ wu) * width

    def regions(self, x, y=None, tol: float = 1e-9) -> np.ndarray:
        """Region label per chart point: interior, boundary or outside."""
        x = np.asarray(x, dtype=float).ravel()
        y = np.zeros_like(x) if y is None else np.asarray(y, dtype=float).ravel()
        labels = np.full(len(x), analytic.OUTSIDE, dtype=object)
        if self.dim == 1 and not self.atomic:
            lo, hi = self.support_bbox()[:2]
            labels[(x > lo + tol) & (x < hi - tol)] = analytic.INTERIOR
            labels[(np.abs(x - lo) <= tol) | (np.abs(x - hi) <= tol)] = analytic.BOUNDARY
            return labels
        poly = self.polygon()
        if poly is not None:
            hps = np.array(poly.halfplanes)
            norms = np.hypot(hps[:, 0], hps[:, 1])
            margin = ((np.outer(x, hps[:, 0]) + np.outer(y, hps[:, 1]) + hps[:, 2]) / norms).min(axis=1)
            labels[margin > tol] = analytic.INTERIOR
            labels[np.abs(margin) <= tol] = analytic.BOUNDARY
            return labels
        if self.has_density and not self.atomic:
            labels[self.density(x, y) > 0] = analytic.INTERIOR
        return labels

    # bin masses --------------------------------------------------------
    def bin_masses(self, grid: GridSpec) -> np.ndarray:
        """Probability of each bin under the analytic distribution."""
        self._require_density()
        a, b = self.alpha, self.beta
        xe = grid.x_edges
        if self.dim == 1:
            # only the y bins containing 0 receive mass
            row = np.zeros(grid.nx)
            if self.atomic:
                atoms = analytic.pdf_skew(a, b, group=self.ensemble.skew_group, canonical=True)
                for p, w in zip(atoms.points, atoms.weights):
                    i = _bin_index(xe, p)
                    if i is not None:
                        row[i] += w
            else:
                row = np.diff(self._cdf_1d(xe))
            out = np.zeros((grid.nx, grid.ny))
            j = _bin_index(grid.y_edges, 0.0)
            if j is not None:
                out[:, j] = row
            return out
        if self.ensemble.is_skew:
            return self._skew_masses(grid)
        if self.ensemble.n == 3:
            return self._hermitian3_masses(grid)
        return self._hermitian4_masses(grid)

    def _cdf_1d(self, x: np.ndarray) -> np.ndarray:
        a, b = self.alpha, self.beta
        if self.ensemble.is_skew:
            m, M = abs(a[0] - b[0]), abs(a[0] + b[0])
        else:
            m, M = analytic._gap_bounds(a, b)
        if self.kind is EnsembleKind.SYMMETRIC_O:
            return analytic.symmetric_n2_cdf(m, M, x)
        xc = np.clip(x, m, M)
        return (xc * xc - m * m) / (M * M - m * m)

    def _bin_polys(self, grid: GridSpec):
        xe, ye = grid.x_edges, grid.y_edges
        for i in range(grid.nx):
            for j in range(grid.ny):
                yield i, j, geometry.rectangle(xe[i], xe[i + 1], ye[j], ye[j + 1])

    def _hermitian3_masses(self, grid: GridSpec, order: int = 4) -> np.ndarray:
        a, b = self.alpha, self.beta
        poly = polygon_n3(a, b)
        cuts = _cut_lines(analytic.break_lines_n3(a, b))
        hps = poly.halfplanes
        bx0, bx1, by0, by1 = poly.bbox()
        out = np.zeros((grid.nx, grid.ny))
        pieces, owners = [], []
        for i, j, rect in self._bin_polys(grid):
            if rect[1, 0] < bx0 or rect[0, 0] > bx1 or rect[2, 1] < by0 or rect[0, 1] > by1:
                continue
            cell = geometry.clip_all(rect, hps)
            for p in geometry.split_all(cell, cuts):
                pieces.append(p)
                owners.append((i, j))
        if not pieces:
            return out
        pts, wts, owner = geometry.quadrature_nodes(pieces, order)
        vals = analytic.hermitian_density(a, b, pts, ordered=True) * wts
        sums = np.bincount(owner, weights=vals, minlength=len(pieces))
        for (i, j), s in zip(owners, sums):
            out[i, j] += s
        return out

    def _hermitian4_masses(self, grid: GridSpec, order: int = 3) -> np.ndarray:
        t, w = np.polynomial.legendre.leggauss(order)
        xe, ye = grid.x_edges, grid.y_edges
        xs = ((xe[:-1, None] + xe[1:, None]) / 2 + grid.dx / 2 * t[None, :]).ravel()
        ys = ((ye[:-1, None] + ye[1:, None]) / 2 + grid.dy / 2 * t[None, :]).ravel()
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        f = self._marginal_n4(X.ravel(), Y.ravel()).reshape(grid.nx, order, grid.ny, order)
        return np.einsum("iajb,a,b->ij", f, w * grid.dx / 2, w * grid.dy / 2)

    def _skew_masses(self, grid: GridSpec, order: int = 3) -> np.ndarray:
        a, b = self.alpha, self.beta
        grp = self.ensemble.skew_group
        factor = 4.0 if grp.special else 8.0
        const = factor / (8 * vandermonde_O(a, "even") * vandermonde_O(b, "even"))
        out = np.zeros((grid.nx, grid.ny))
        chamber = [(1.0, -1.0, 0.0)] + ([] if grp.special else [(0.0, 1.0, 0.0)])
        for s0, s1, t0, t1, weight in self._skew_rects():
            rect_hps = [(1.0, 1.0, -s0), (-1.0, -1.0, s1), (1.0, -1.0, -t0), (-1.0, 1.0, t1)] + chamber
            gx0, gx1 = (s0 + t0) / 2, (s1 + t1) / 2
            gy0, gy1 = (s0 - t1) / 2, (s1 - t0) / 2
            for i, j, cell in self._bin_polys(grid):
                if cell[1, 0] < gx0 or cell[0, 0] > gx1 or cell[2, 1] < gy0 or cell[0, 1] > gy1:
                    continue
                piece = geometry.clip_all(cell, rect_hps)
                if len(piece) < 3:
                    continue
                pts, wts, _ = geometry.quadrature_nodes([piece], order)
                out[i, j] += weight * const * float(np.dot(vandermonde_O(pts, "even"), wts))
        return out


def _bin_index(edges: np.ndarray, x: float):
    """Bin of ``x`` with the histogram convention (last bin closed on the right)."""
    if x < edges[0] or x > edges[-1]:
        return None
    return min(int(np.searchsorted(edges, x, side="right")) - 1, len(edges) - 2)


def case_model(ensemble: Ensemble | str, alpha, beta, n: int | None = None) -> CaseModel:
    if not isinstance(ensemble, Ensemble):
        if n is None:
            raise HornError("n is required when the ensemble is given by name")
        ensemble = Ensemble.parse(ensemble, n)
    return CaseModel(ensemble, alpha, beta)


def default_grid(model: CaseModel, bins: int = 100, margin: float = 0.05) -> GridSpec:
    """``bins x bins`` over the support bounding box plus a relative margin (1-D: one y bin)."""
    x0, x1, y0, y1 = model.support_bbox()
    if model.atomic:
        # put every atom at a bin centre so rounding cannot split it
        if x1 > x0:
            h = (x1 - x0) / max(bins - 1, 1)
            return GridSpec(x0 - h / 2, x1 + h / 2, max(bins, 2), -0.5, 0.5, 1)
        odd = bins | 1
        h = 0.1 * max(1.0, abs(x0)) / odd
        return GridSpec(x0 - odd * h / 2, x0 + odd * h / 2, odd, -0.5, 0.5, 1)
    span = max(x1 - x0, y1 - y0 if model.dim == 2 else 0.0, 1e-3 * max(1.0, abs(x0), abs(x1)))
    pad = margin * span
    if model.dim == 1:
        return GridSpec(x0 - pad, x1 + pad, bins, -0.5, 0.5, 1)
    return GridSpec(x0 - pad, x1 + pad, bins, y0 - pad, y1 + pad, bins)


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

def histogram(model: CaseModel, values: np.ndarray, grid: GridSpec, metadata: dict | None = None) -> HistogramGrid:
    x, y = model.coords(values)
    counts, _, _ = np.histogram2d(x, y, bins=[grid.x_edges, grid.y_edges])
    counts = counts.astype(np.int64)
    total = len(values)
    return HistogramGrid(grid, counts, total, int(total - counts.sum()), dict(metadata or model.metadata()))


def run_mc(alpha, beta, ensemble: Ensemble, n_samples: int, grid: GridSpec | None = None, seed: int = 0,
           workers: int | None = None, samples_out=None) -> HistogramGrid:
    """Sample ``n_samples`` spectra and bin them in the ensemble's chart.

    The result depends only on ``(seed, n_samples)``.  With ``samples_out`` the
    full spectra are also written as CSV.
    """
    if n_samples < 1:
        raise HornError(f"n_samples must be >= 1, got {n_samples}")
    model = CaseModel(ensemble, alpha, beta)
    grid = grid or default_grid(model)
    batch = sample_spectra(model.alpha, model.beta, ensemble, n_samples, seed, workers)
    if samples_out is not None:
        header = ",".join(f"gamma_{i + 1}" for i in range(batch.values.shape[1])) + ",degenerate"
        data = np.column_stack([batch.values, batch.degenerate.astype(float)])
        np.savetxt(samples_out, data, delimiter=",", header=header, comments="", fmt="%.17g")
    meta = model.metadata()
    meta["seed"] = int(seed)
    meta["degenerate"] = int(batch.degenerate.sum())
    return histogram(model, batch.values, grid, meta)


@dataclass(frozen=True)
class ComparisonReport:
    """MC-versus-analytic statistics.

    ``l1_distance`` sums ``|empirical - analytic|`` bin masses and adds the
    mass each side puts outside the grid, so disjoint distributions give 2.
    ``chi_square``, its p-value and ``max_cell_deviation`` (in Poisson sigmas)
    use only bins with expected count ``>= floor``.
    """

    l1_distance: float
    chi_square: float
    dof: int
    p_value: float
    max_cell_deviation: float
    bins_used: int

    def summary(self) -> str:
        return (f"L1={self.l1_distance:.6g} chi2={self.chi_square:.6g} dof={self.dof} "
                f"p={self.p_value:.6g} max_dev={self.max_cell_deviation:.6g}sigma bins={self.bins_used}")


def compare(hist: HistogramGrid, model: CaseModel | None = None, floor: float = 10.0) -> ComparisonReport:
    """Compare a histogram with analytic bin masses (built from the histogram metadata by default)."""
    if model is None:
        meta = hist.metadata
        model = case_model(meta["ensemble"], meta["alpha"], meta["beta"], int(meta["n"]))
    masses = model.bin_masses(hist.grid)
    emp = hist.counts / hist.total
    l1 = float(np.abs(emp - masses).sum() + hist.overflow / hist.total + max(0.0, 1.0 - masses.sum()))
    expected = masses * hist.total
    keep = expected >= floor
    used = int(keep.sum())
    if used == 0:
        return ComparisonReport(l1, math.nan, 0, math.nan, math.nan, 0)
    obs, exp = hist.counts[keep], expected[keep]
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    dof = max(used - 1, 1)
    return ComparisonReport(
        l1_distance=l1,
        chi_square=chi2,
        dof=dof,
        p_value=float(stats.chi2.sf(chi2, dof)),
        max_cell_deviation=float((np.abs(obs - exp) / np.sqrt(exp)).max()),
        bins_used=used,
    )


def hciz_mc(alpha, x, n_draws: int, seed: int = 0) -> tuple[complex, float]:
    """Monte-Carlo estimate of ``int dU exp(i tr(diag(x) U diag(alpha) U^dagger))`` and its standard error."""
    a, xv = np.asarray(alpha, dtype=float), np.asarray(x, dtype=float)
    n = len(a)
    vals = []
    for block, start in enumerate(range(0, n_draws, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, n_draws - start)
        u = _haar_unitary_batch(n, size, RngStream(seed, block).generator())
        phase = np.einsum("k,nkj,j->n", xv, np.abs(u) ** 2, a)
        vals.append(np.exp(1j * phase))
    v = np.concatenate(vals)
    se = math.sqrt((v.real.var() + v.imag.var()) / len(v))
    return complex(v.mean()), se


def hc_orthogonal_mc(alpha, beta, n: int, special: bool, n_draws: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of ``int dO exp(tr(A O B O^T))`` for canonical skew A, B of size n."""
    A, B = skew_block_matrix(alpha, n), skew_block_matrix(beta, n)
    vals = []
    for block, start in enumerate(range(0, n_draws, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, n_draws - start)
        o = _haar_orthogonal_batch(n, size, RngStream(seed, block).generator(), special)
        vals.append(np.exp(np.einsum("ij,nji->n", A, o @ B @ np.swapaxes(o, -1, -2))))
    v = np.concatenate(vals)
    return float(v.mean()), float(v.std() / math.sqrt(len(v)))


# --------------------------------------------------------------------------
# Normalization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls: target tolerance, Gauss order and refinement levels."""

    tol: float = 1e-6
    order: int = 4
    base: int = 4
    max_level: int = 3


_DEFAULT_TOL = {2: 1e-10, 3: 1e-10, 4: 1e-4}


def _norm_hermitian2(a, b, spec: QuadratureSpec) -> tuple[float, float]:
    m, M = analytic._gap_bounds(a, b)
    x, w = np.polynomial.legendre.leggauss(spec.order)
    pieces = [(0.0, m), (m, M), (M, M + 1.0)]
    est = 0.0
    for lo, hi in pieces:
        g = (lo + hi) / 2 + (hi - lo) / 2 * x
        f = g * analytic.j2_values(a[0] - a[1], b[0] - b[1], g) / (vandermonde(a) * vandermonde(b))
        # d gamma_1 = d gamma_12 / 2
        est += float(np.dot(f, w)) * (hi - lo) / 2 / 2
    return est, 0.0


def _norm_hermitian3(a, b, spec: QuadratureSpec) -> tuple[float, float]:
    poly = polygon_n3(a, b)
    cuts = _cut_lines(analytic.break_lines_n3(a, b))
    pieces = geometry.split_all(poly.vertices, cuts)
    const = 1.0 / (vandermonde(a) * vandermonde(b))

    def integrand(pts):
        g = np.column_stack([pts, a.sum() + b.sum() - pts.sum(axis=1)])
        return const * vandermonde(g) * analytic.j3_values(a, b, g)

    results = []
    for order in (spec.order, spec.order + 2):
        pts, wts, _ = geometry.quadrature_nodes(pieces, order)
        results.append(float(np.dot(integrand(pts), wts)))
    return results[-1], abs(results[-1] - results[0])


def _norm_hermitian4_level(a, b, k: int, order: int) -> float:
    """Tensor Gauss rule in the gaps ``d_i = gamma_i - gamma_{i+1}``.

    The ordered sector is the positive octant in these coordinates, so no cell
    is cut by the sector boundary.
    """
    lo, hi = weyl_bounds(a, b)
    trace = a.sum() + b.sum()
    x, w = np.polynomial.legendre.leggauss(order)
    axes, weights = [], []
    for d in range(3):
        e = np.linspace(0.0, hi[d] - lo[d + 1], k + 1)
        h = np.diff(e)
        axes.append(((e[:-1, None] + e[1:, None]) / 2 + h[:, None] / 2 * x).ravel())
        weights.append((h[:, None] / 2 * w).ravel())
    D = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
    W = np.einsum("i,j,k->ijk", *weights).ravel()
    g4 = (trace - D[:, 0] - 2 * D[:, 1] - 3 * D[:, 2]) / 4
    full = np.column_stack([g4 + D.sum(axis=1), g4 + D[:, 1] + D[:, 2], g4 + D[:, 2], g4])
    # d(gamma_1, gamma_2, gamma_3) / d(d_1, d_2, d_3) has determinant 1/4
    jac = 0.25
    keep = np.all((full >= lo - 1e-12) & (full <= hi + 1e-12), axis=1)
    full, W = full[keep], W[keep]
    vals = vandermonde(full) * analytic.j4_values(a, b, full) / (vandermonde(a) * vandermonde(b))
    return float(np.dot(vals, W)) * jac


def _norm_hermitian4(a, b, spec: QuadratureSpec) -> tuple[float, float]:
    k = spec.base
    prev = _norm_hermitian4_level(a, b, k, spec.order)
    err = math.inf
    for _ in range(spec.max_level):
        k *= 2
        cur = _norm_hermitian4_level(a, b, k, spec.order)
        err = abs(cur - prev)
        if err <= spec.tol:
            return cur, err
        prev = cur
    raise QuadratureError(f"n=4 normalization did not reach tol={spec.tol}", prev, err)


def _norm_symmetric2(a, b, spec: QuadratureSpec) -> tuple[float, float]:
    m, M = analytic._gap_bounds(a, b)

    def level(order):
        # gamma^2 = m^2 + (M^2 - m^2)(1 - cos theta)/2 absorbs both edge singularities
        x, w = np.polynomial.legendre.leggauss(order)
        theta = np.pi / 2 * (x + 1)
        g = np.sqrt(m * m + (M * M - m * m) * (1 - np.cos(theta)) / 2)
        dg = (M * M - m * m) * np.sin(theta) / (4 * g)
        rho = analytic.symmetric_n2_density(m, M, g)
        return float(np.dot(rho * dg, w) * np.pi / 2)

    lo, hi = level(8 * spec.order), level(16 * spec.order)
    return hi, abs(hi - lo)


def _norm_skew(model: CaseModel) -> tuple[float, float]:
    x0, x1, y0, y1 = model.support_bbox()
    pad = 0.01 * max(1.0, x1 - x0, y1 - y0)
    grid = GridSpec(x0 - pad, x1 + pad, 1, y0 - pad, y1 + pad, 1)
    return float(model.bin_masses(grid).sum()), 0.0


def normalization_check(ensemble: Ensemble, alpha, beta, spec: QuadratureSpec | None = None) -> float:
    """Integral over the ordered sector (Hermitian: of the kernel-weighted Vandermonde ratio).

    Hermitian cases return ``1, 1/2, 1/12`` for n = 2, 3, 4 up to quadrature
    error; the symmetric n = 2 and skew cases return the total probability.
    Raises :class:`QuadratureError` when refinement stalls above ``spec.tol``.
    """
    model = CaseModel(ensemble, alpha, beta)
    model._require_density()
    a, b = model.alpha, model.beta
    n = ensemble.n
    if spec is None:
        spec = QuadratureSpec(tol=_DEFAULT_TOL.get(n, 1e-6))
    if ensemble.kind is EnsembleKind.HERMITIAN_U:
        fn = {2: _norm_hermitian2, 3: _norm_hermitian3, 4: _norm_hermitian4}[n]
        value, err = fn(a, b, spec)
    elif ensemble.kind is EnsembleKind.SYMMETRIC_O:
        value, err = _norm_symmetric2(a, b, spec)
    else:
        value, err = _norm_skew(model)
    if err > spec.tol:
        raise QuadratureError(f"normalization error estimate {err:.3g} exceeds tol {spec.tol:.3g}", value, err)
    return value


def expected_normalization(ensemble: Ensemble) -> float:
    if ensemble.kind is EnsembleKind.HERMITIAN_U:
        return float(j_normalization(ensemble.n))
    return 1.0


# --------------------------------------------------------------------------
# Batch configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    name: str
    ensemble: Ensemble
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    samples: int
    seed: int
    bins: int
    out: str | None = None


def parse_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in str(text).replace(" ", "").split(",") if t)
    except ValueError:
        raise HornError(f"cannot parse {text!r} as a comma-separated list of numbers") from None


def load_batch(source) -> list[RunConfig]:
    """Read runs from an INI-style file: one ``[section]`` per run.

    Keys: ``ensemble``, ``n``, ``alpha``, ``beta``, ``samples``, ``seed``,
    ``grid`` (bins per axis) and an optional ``out`` path.
    """
    cp = configparser.ConfigParser()
    if isinstance(source, (str, Path)) and Path(source).exists():
        cp.read(source)
    else:
        cp.read_string(str(source))
    runs = []
    for name in cp.sections():
        sec = cp[name]
        try:
            runs.append(RunConfig(
                name=name,
                ensemble=Ensemble.parse(sec["ensemble"], int(sec["n"])),
                alpha=parse_list(sec["alpha"]),
                beta=parse_list(sec["beta"]),
                samples=int(sec.get("samples", "100000")),
                seed=int(sec.get("seed", "0")),
                bins=int(sec.get("grid", "100")),
                out=sec.get("out"),
            ))
        except KeyError as exc:
            raise HornError(f"run [{name}] lacks key {exc}") from None
    return runs


def iter_runs(runs: Iterable[RunConfig], workers: int | None = None):
    """Yield ``(config, histogram)`` for each batch run."""
    for cfg in runs:
        model = CaseModel(cfg.ensemble, cfg.alpha, cfg.beta)
        grid = default_grid(model, cfg.bins)
        yield cfg, run_mc(cfg.alpha, cfg.beta, cfg.ensemble, cfg.samples, grid, cfg.seed, workers)
