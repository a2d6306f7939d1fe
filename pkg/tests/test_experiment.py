import math

import numpy as np
import pytest

import oracles
from hornpdf import experiment
from hornpdf.core_types import Ensemble, HornError, QuadratureError, UnsupportedCaseError
from hornpdf.experiment import (
    GridSpec,
    HistogramGrid,
    QuadratureSpec,
    case_model,
    compare,
    default_grid,
    load_batch,
    normalization_check,
    run_mc,
)
from hornpdf.support import polygon_n3

SYM = (1.0, 0.0, -1.0)

# every in-scope analytic case, with spectra used in the regression runs
CASES = [
    ("hermitian", 2, (1.0, 0.0), (2.0, 0.5)),
    ("hermitian", 3, (1.5, 1.0, -2.0), (2.0, 1.5, -3.5)),
    ("hermitian", 4, (2.0, 1.0, 0.0, -3.0), (1.0, 0.2, -0.4, -0.8)),
    ("symmetric", 2, (1.0, 0.0), (2.0, 0.5)),
    ("skew-so", 2, (1.5,), (0.5,)),
    ("skew-o", 2, (1.5,), (0.5,)),
    ("skew-so", 3, (1.0,), (2.0,)),
    ("skew-o", 3, (1.0,), (2.0,)),
    ("skew-so", 4, (2.0, 1.0), (1.0, 0.5)),
    ("skew-o", 4, (2.0, 1.0), (1.0, 0.5)),
]


class TestGrid:
    def test_edges(self):
        g = GridSpec(0, 1, 4, -1, 1, 2)
        np.testing.assert_allclose(g.x_edges, [0, 0.25, 0.5, 0.75, 1])
        assert g.bin_area == pytest.approx(0.25)

    @pytest.mark.parametrize("args", [(0, 1, 0, 0, 1, 1), (1, 0, 2, 0, 1, 1)])
    def test_invalid(self, args):
        with pytest.raises(HornError):
            GridSpec(*args)

    def test_list_round_trip(self):
        g = GridSpec(0.1, 2.3, 7, -1.0, 0.5, 3)
        assert GridSpec.from_list(g.to_list()) == g

    def test_default_grid_has_margin(self):
        m = case_model("hermitian", SYM, SYM, 3)
        g = default_grid(m)
        assert (g.nx, g.ny) == (100, 100)
        assert g.x0 < 0 < 2 < g.x1 and g.y0 < -1 and g.y1 > 1

    def test_atoms_at_bin_centres(self):
        m = case_model("skew-o", (1.5,), (0.5,), 2)
        g = default_grid(m, 11)
        xc, _ = g.centers()
        for atom in (1.0, 2.0):
            assert np.min(np.abs(xc - atom)) < 1e-12


class TestHistogram:
    def test_csv_round_trip(self, tmp_path):
        h = run_mc(SYM, SYM, Ensemble.parse("hermitian", 3), 2000, GridSpec(0, 2, 5, -1, 1, 4), seed=3)
        h.write(tmp_path / "h.csv")
        back = HistogramGrid.read(tmp_path / "h.csv")
        assert back == h
        assert back.metadata["seed"] == 3
        assert back.counts.sum() + back.overflow == back.total

    def test_header_lines(self):
        h = run_mc(SYM, SYM, Ensemble.parse("hermitian", 3), 100, GridSpec(0, 2, 2, -1, 1, 2), seed=1)
        lines = h.to_csv().splitlines()
        keys = [ln[2:].split(":")[0] for ln in lines if ln.startswith("#")]
        assert {"ensemble", "alpha", "beta", "seed", "total"} <= set(keys)
        assert "bin_x_low,bin_y_low,count" in lines

    def test_missing_metadata(self):
        with pytest.raises(HornError):
            HistogramGrid.from_csv("bin_x_low,bin_y_low,count\n0,0,1\n")

    def test_density_normalised(self):
        m = case_model("hermitian", SYM, SYM, 3)
        g = default_grid(m, 20)
        h = run_mc(SYM, SYM, m.ensemble, 5000, g, seed=2)
        assert (h.density() * g.bin_area).sum() == pytest.approx(1.0)


class TestRunMc:
    def test_sym_samples_in_quadrangle(self):
        m = case_model("hermitian", SYM, SYM, 3)
        g = default_grid(m, 50)
        h = run_mc(SYM, SYM, m.ensemble, 10_000, g, seed=4)
        assert h.overflow == 0
        poly = polygon_n3(SYM, SYM)
        xc, yc = g.centers()
        X, Y = np.meshgrid(xc, yc, indexing="ij")
        # every occupied bin centre lies within one bin diagonal of the quadrangle
        reach = math.hypot(g.dx, g.dy)
        occupied = np.column_stack([X[h.counts > 0], Y[h.counts > 0]])
        assert poly.contains(occupied, tol=reach).all()

    def test_so2_single_cell(self):
        m = case_model("skew-so", (1.5,), (0.7,), 2)
        h = run_mc((1.5,), (0.7,), m.ensemble, 1000, default_grid(m), seed=5)
        assert (h.counts > 0).sum() == 1 and h.counts.max() == 1000

    def test_zero_samples(self):
        with pytest.raises(HornError):
            run_mc(SYM, SYM, Ensemble.parse("hermitian", 3), 0)

    def test_reproducible(self):
        ens = Ensemble.parse("skew-o", 4)
        a = run_mc((2, 1), (1, 0.5), ens, 20_000, seed=6, workers=1)
        b = run_mc((2, 1), (1, 0.5), ens, 20_000, seed=6, workers=3)
        assert a == b

    def test_samples_out(self, tmp_path):
        path = tmp_path / "s.csv"
        run_mc(SYM, SYM, Ensemble.parse("hermitian", 3), 50, seed=7, samples_out=path)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape == (50, 4)
        np.testing.assert_allclose(data[:, :3].sum(axis=1), 0.0, atol=1e-9)


class TestBinMasses:
    @pytest.mark.parametrize("kind, n, a, b", CASES)
    def test_total_mass(self, kind, n, a, b):
        m = case_model(kind, a, b, n)
        g = default_grid(m, 12)
        assert m.bin_masses(g).sum() == pytest.approx(1.0, abs=2e-4 if n == 4 and kind == "hermitian" else 1e-9)

    def test_n3_masses_vs_midpoint(self):
        m = case_model("hermitian", *((1.5, 1.0, -2.0), (2.0, 1.5, -3.5)), n=3)
        g = default_grid(m, 6)
        exact = m.bin_masses(g)
        k = 200
        approx = np.zeros_like(exact)
        for i, (x0, x1) in enumerate(zip(g.x_edges[:-1], g.x_edges[1:])):
            for j, (y0, y1) in enumerate(zip(g.y_edges[:-1], g.y_edges[1:])):
                xs = x0 + (np.arange(k) + 0.5) * (x1 - x0) / k
                ys = y0 + (np.arange(k) + 0.5) * (y1 - y0) / k
                X, Y = np.meshgrid(xs, ys, indexing="ij")
                approx[i, j] = m.density(X, Y).mean() * g.bin_area
        np.testing.assert_allclose(exact, approx, atol=2e-4)

    def test_so4_density_matches_oracle(self):
        m = case_model("skew-so", (2.0, 1.0), (1.0, 0.5), 4)
        x = np.array([2.5, 2.0, 1.8])
        y = np.array([1.2, 0.7, -0.2])
        ref = [float(oracles.so4_canonical_density((2, 1), (1, 0.5), xi, yi)) for xi, yi in zip(x, y)]
        np.testing.assert_allclose(m.density(x, y), ref)


class TestCompare:
    @pytest.mark.slow
    @pytest.mark.parametrize("kind, n, a, b", CASES)
    def test_matched_cases(self, kind, n, a, b):
        m = case_model(kind, a, b, n)
        bins = 12 if n == 4 and kind == "hermitian" else 30
        h = run_mc(a, b, m.ensemble, 200_000, default_grid(m, bins), seed=8)
        rep = compare(h, m)
        assert rep.p_value > 1e-4, rep.summary()
        assert rep.max_cell_deviation < 5.5, rep.summary()

    def test_wrong_spectra_rejected(self):
        a, b = (1.5, 1.0, -2.0), (2.0, 1.5, -3.5)
        m = case_model("hermitian", a, b, 3)
        h = run_mc(a, b, m.ensemble, 100_000, default_grid(m, 20), seed=9)
        wrong = case_model("hermitian", a, (2.0, 1.5, -3.0), 3)
        assert compare(h, wrong).p_value < 1e-6

    def test_disjoint_grid(self):
        m = case_model("hermitian", SYM, SYM, 3)
        h = run_mc(SYM, SYM, m.ensemble, 1000, GridSpec(10, 11, 4, 10, 11, 4), seed=10)
        rep = compare(h, m)
        assert rep.l1_distance == pytest.approx(2.0)
        assert rep.bins_used == 0

    def test_unsupported(self):
        m = case_model("symmetric", SYM, SYM, 3)
        h = run_mc(SYM, SYM, m.ensemble, 100, default_grid(m, 5), seed=11)
        with pytest.raises(UnsupportedCaseError):
            compare(h)

    @pytest.mark.slow
    def test_fine_grid_l1_is_counting_noise(self):
        # 100 x 100 bins at 10^6 samples: L1 is dominated by Poisson noise,
        # E|X - Np| ~ sqrt(2 N p / pi), so compare against that expectation
        m = case_model("hermitian", SYM, SYM, 3)
        g = default_grid(m, 100)
        h = run_mc(SYM, SYM, m.ensemble, 1_000_000, g, seed=12)
        p = m.bin_masses(g)
        expected = np.sqrt(2 * p / (math.pi * h.total)).sum()
        rep = compare(h, m)
        assert rep.l1_distance == pytest.approx(expected, rel=0.1)
        assert rep.p_value > 1e-4


class TestNormalization:
    def test_n2(self):
        assert normalization_check(Ensemble.parse("hermitian", 2), (1.3, -0.2), (0.4, -2.0)) == pytest.approx(1, abs=1e-8)

    def test_n3_reference_spectra(self):
        v = normalization_check(Ensemble.parse("hermitian", 3), (1.5, 1, -2), (2, 1.5, -3.5))
        assert v == pytest.approx(0.5, abs=1e-6)

    def test_n4(self):
        v = normalization_check(Ensemble.parse("hermitian", 4), (2, 1, 0, -3), (1, 0.2, -0.4, -0.8))
        assert v == pytest.approx(1 / 12, abs=1e-4)

    def test_symmetric(self):
        v = normalization_check(Ensemble.parse("symmetric", 2), (1, 0), (2, 0))
        assert v == pytest.approx(oracles.symmetric_n2_mass(1, 2), abs=1e-10)

    @pytest.mark.parametrize("kind, n, a, b", [c for c in CASES if c[0].startswith("skew") and c[1] > 2])
    def test_skew_integrates_to_one(self, kind, n, a, b):
        assert normalization_check(Ensemble.parse(kind, n), a, b) == pytest.approx(1.0, abs=1e-10)

    def test_non_convergence_reports_estimate(self):
        spec = QuadratureSpec(tol=1e-14, order=2, base=2, max_level=1)
        with pytest.raises(QuadratureError) as info:
            normalization_check(Ensemble.parse("hermitian", 4), (2, 1, 0, -3), (1, 0.2, -0.4, -0.8), spec)
        assert info.value.estimate == pytest.approx(1 / 12, rel=0.2)
        assert info.value.error > 0

    def test_unsupported(self):
        with pytest.raises(UnsupportedCaseError):
            normalization_check(Ensemble.parse("symmetric", 3), SYM, SYM)


class TestBatch:
    TEXT = """
[sym3]
ensemble = hermitian
n = 3
alpha = 1, 0, -1
beta = 1,0,-1
samples = 500
seed = 4
grid = 10

[so4]
ensemble = skew-so
n = 4
alpha = 2,1
beta = 1,0.5
"""

    def test_parse(self):
        runs = load_batch(self.TEXT)
        assert [r.name for r in runs] == ["sym3", "so4"]
        assert runs[0].alpha == (1.0, 0.0, -1.0) and runs[0].bins == 10
        assert runs[1].samples == 100_000 and runs[1].seed == 0

    def test_missing_key(self):
        with pytest.raises(HornError):
            load_batch("[x]\nensemble = hermitian\nn = 3\n")

    def test_iter_runs(self):
        runs = load_batch(self.TEXT)[:1]
        (cfg, hist), = list(experiment.iter_runs(runs))
        assert hist.total == 500 and hist.grid.nx == 10
