import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hornpdf import analytic
from hornpdf.analytic import (
    BOUNDARY,
    INTERIOR,
    OUTSIDE,
    Atoms,
    break_lines_n3,
    enhancement_lines_n3,
    hc_orthogonal,
    hciz_unitary,
    j3_closed,
    j3_sum,
    j_kernel,
    j_values,
    pdf_hermitian,
    pdf_skew,
    pdf_symmetric_n2,
    symmetric_n2_cdf,
    symmetric_n2_density,
)
from hornpdf.core_types import DegenerateSpectrumError, HornError, UnsupportedCaseError
from hornpdf.experiment import hc_orthogonal_mc, hciz_mc
from hornpdf.support import check_horn, polygon_n3, weyl_bounds

SYM = (1.0, 0.0, -1.0)
SPEC_C = ((1.5, 1.0, -2.0), (2.0, 1.5, -3.5))
A4 = (2.0, 1.0, 0.0, -3.0)
B4 = (1.0, 0.2, -0.4, -0.8)


def spectra(n, lo_gap=0.1):
    gaps = st.lists(st.floats(lo_gap, 3.0), min_size=n - 1, max_size=n - 1)
    return st.tuples(st.floats(-2, 2), gaps).map(
        lambda t: tuple(float(v) for v in t[0] - np.concatenate([[0.0], np.cumsum(t[1])])))


def plane_points(a, b, k, rng, pad=0.2):
    lo, hi = weyl_bounds(a, b)
    span = hi[0] - lo[-1]
    cols = [rng.uniform(lo[i] - pad * span, hi[i] + pad * span, k) for i in range(len(a) - 1)]
    free = np.column_stack(cols)
    return np.column_stack([free, np.sum(a) + np.sum(b) - free.sum(axis=1)])


class TestHciz:
    def test_n1(self):
        assert hciz_unitary([0.7], [2.0]) == pytest.approx(np.exp(1.4j))

    def test_n2_example(self):
        assert hciz_unitary((1, 0), (1, 0)) == pytest.approx((np.exp(1j) - 1) / 1j, abs=1e-14)

    @given(spectra(2), spectra(2))
    @settings(max_examples=30, deadline=None)
    def test_n2_vs_quadrature(self, a, x):
        assert hciz_unitary(a, x) == pytest.approx(oracles.hciz_n2(a, x), abs=1e-10)

    def test_small_argument_limit(self):
        assert hciz_unitary((1, 0.3, -0.5), (3e-4, 1e-4, -2e-4)) == pytest.approx(1, abs=1e-3)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateSpectrumError):
            hciz_unitary((1, 1), (1, 0))
        with pytest.raises(DegenerateSpectrumError):
            hciz_unitary((1, 0), (2, 2))

    def test_n3_vs_mc(self):
        a, x = (1.2, 0.1, -0.9), (0.8, -0.3, -1.1)
        mc, se = hciz_mc(a, x, 100_000, seed=3)
        assert abs(hciz_unitary(a, x) - mc) < 5e-3
        assert abs(hciz_unitary(a, x) - mc) < 5 * se


class TestHcOrthogonal:
    def test_o2(self):
        assert hc_orthogonal([1.3], [0.4], "O_even") == pytest.approx(math.cosh(2 * 1.3 * 0.4))

    def test_so2_sign_convention(self):
        # SO(2) commutes with B, so the average is exp(tr AB) = exp(-2ab)
        assert hc_orthogonal([1.3], [0.4], "SO_even") == pytest.approx(math.exp(-2 * 1.3 * 0.4))
        mc, _ = hc_orthogonal_mc([1.3], [0.4], 2, True, 1000, seed=1)
        assert mc == pytest.approx(math.exp(-2 * 1.3 * 0.4), rel=1e-12)

    def test_o3(self):
        a, b = 0.9, 0.6
        exact = hc_orthogonal([a], [b], "O_odd")
        assert exact == pytest.approx(math.sinh(2 * a * b) / (2 * a * b))
        mc, _ = hc_orthogonal_mc([a], [b], 3, False, 100_000, seed=2)
        assert mc == pytest.approx(exact, abs=1e-2)

    @pytest.mark.parametrize("group, n, special", [("O_even", 4, False), ("SO_even", 4, True), ("O_odd", 5, False)])
    def test_m2_vs_mc(self, group, n, special):
        a, b = [0.9, 0.4], [0.7, 0.2]
        if group == "SO_even":
            b = [0.7, -0.2]
        exact = hc_orthogonal(a, b, group)
        mc, se = hc_orthogonal_mc(a, b, n, special, 100_000, seed=4)
        assert abs(exact - mc) < 5 * se


class TestJKernel:
    def test_n2_interior(self):
        assert j_kernel(2, (1, 0), (2, 0), (2.75, 0.25)).value == 1.0

    def test_n2_endpoint_half(self):
        k = j_kernel(2, (1, 0), (2, 0), (2.0, -1.0))
        assert k.value == 0.5 and k.derivative_break

    def test_n3_outside_zero(self):
        assert j_kernel(3, SYM, SYM, (2.5, 0.0, -2.5)).value == 0

    def test_n3_center(self):
        assert j_kernel(3, SYM, SYM, (1.0, 0.0, -1.0)).value == pytest.approx(1.0)
        assert oracles.xi_length(SYM, SYM, (1.0, 0.0, -1.0)) == pytest.approx(1.0)

    def test_n3_forms_agree_inside(self):
        rng = np.random.default_rng(1)
        a, b = SPEC_C
        g = -np.sort(-plane_points(a, b, 5000, rng, pad=0.0), axis=1)
        ins = np.array([oracles.xi_length(a, b, r) > 1e-9 for r in g])
        np.testing.assert_allclose(j3_closed(a, b, g[ins]), j3_sum(a, b, g[ins]), atol=1e-12)

    def test_n3_matches_honeycomb_everywhere(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            a = tuple(np.sort(rng.normal(size=3))[::-1])
            b = tuple(np.sort(rng.normal(size=3))[::-1])
            g = -np.sort(-plane_points(a, b, 2000, rng), axis=1)
            ref = [oracles.xi_length(a, b, r) for r in g]
            np.testing.assert_allclose(j_values(a, b, g), ref, atol=1e-10)

    def test_n4_zero_outside_support(self):
        rng = np.random.default_rng(3)
        g = -np.sort(-plane_points(A4, B4, 3000, rng, pad=0.3), axis=1)
        out = np.array([not check_horn(A4, B4, r).inside for r in g])
        assert out.sum() > 100
        np.testing.assert_allclose(j_values(A4, B4, g[out]), 0.0, atol=1e-10)

    def test_n4_nonnegative(self):
        rng = np.random.default_rng(4)
        g = -np.sort(-plane_points(A4, B4, 3000, rng), axis=1)
        assert j_values(A4, B4, g).min() > -1e-10

    @pytest.mark.parametrize("g1, g2, kink", [(2.2, 0.5, True), (2.2, 0.8, True), (2.0, 0.8, False)])
    def test_n4_break_flag(self, g1, g2, kink):
        # gamma_1 = a1 + b2 = 2.2 is a wall between cubic pieces; confirm with
        # separate cubic fits on either side of the point
        tr = sum(A4) + sum(B4)
        g = np.array([g1, g2, -0.6, tr - g1 - g2 + 0.6])
        t = np.linspace(0, 0.05, 21)

        def along(s):
            pts = np.tile(g, (len(s), 1))
            pts[:, 0] += s
            pts[:, 3] -= s
            return j_values(A4, B4, pts)

        right, left = np.polyfit(t, along(t), 3), np.polyfit(-t, along(-t), 3)
        jump = abs(2 * right[1] - 2 * left[1])
        assert (jump > 1e-3) == kink
        assert j_kernel(4, A4, B4, g).derivative_break == kink

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateSpectrumError):
            j_kernel(3, (1, 1, 0), SYM, (1, 0, -1))

    def test_wrong_length(self):
        with pytest.raises(HornError):
            j_kernel(3, SYM, SYM, (1, 0))

    def test_n5_unsupported(self):
        with pytest.raises(UnsupportedCaseError):
            j_values((4, 3, 2, 1, 0), (4, 3, 2, 1, 0), [[7, 5, 4, 2, 2]])

    @given(spectra(3), spectra(3), st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_swap_symmetry(self, a, b, seed):
        g = -np.sort(-plane_points(a, b, 200, np.random.default_rng(seed)), axis=1)
        np.testing.assert_allclose(j_values(a, b, g), j_values(b, a, g), atol=1e-12)

    def test_n4_swap_symmetry(self):
        g = -np.sort(-plane_points(A4, B4, 300, np.random.default_rng(6)), axis=1)
        np.testing.assert_allclose(j_values(A4, B4, g), j_values(B4, A4, g), atol=1e-12)


class TestJ3BreakLines:
    def test_flag_on_rays(self):
        a, b = SPEC_C
        for seg in break_lines_n3(a, b):
            mid = np.add(seg.start, seg.end) / 2
            g = (mid[0], mid[1], sum(a) + sum(b) - mid.sum())
            assert j_kernel(3, a, b, g).derivative_break, seg.label

    def test_continuity_across_rays(self):
        rng = np.random.default_rng(7)
        a, b = SPEC_C
        tr = sum(a) + sum(b)
        for seg in break_lines_n3(a, b):
            p, q = np.array(seg.start), np.array(seg.end)
            d = (q - p) / np.linalg.norm(q - p)
            normal = np.array([-d[1], d[0]])
            t = rng.uniform(0.05, 0.95, 1000)
            pts = p + t[:, None] * (q - p)
            h = 1e-9
            both = []
            for s in (h, -h):
                x = pts + s * normal
                g = np.column_stack([x, tr - x.sum(axis=1)])
                both.append(j_values(a, b, -np.sort(-g, axis=1)))
            assert np.abs(both[0] - both[1]).max() < 1e-8, seg.label

    def test_generic_point_not_flagged(self):
        assert not j_kernel(3, SYM, SYM, (1.3, 0.4, -1.7)).derivative_break


class TestPdfHermitian:
    def test_n2_gap_law(self):
        # alpha = beta = (1, 0): gamma_1 = 1 + g/2, density in gamma_1 is 2 * g/2 = g
        for g1 in (1.2, 1.5, 1.9):
            v = pdf_hermitian((1, 0), (1, 0), [g1], ordered=True)
            assert v.value == pytest.approx(2 * g1 - 2)
            assert v.region == INTERIOR

    def test_n2_unordered_is_half(self):
        assert pdf_hermitian((1, 0), (1, 0), [1.5]).value == pytest.approx(0.5)
        assert pdf_hermitian((1, 0), (1, 0), [0.5]).value == pytest.approx(0.5)

    def test_outside(self):
        v = pdf_hermitian(SYM, SYM, [2.5, 0.0])
        assert v.value == 0 and v.region == OUTSIDE

    def test_boundary(self):
        assert pdf_hermitian(SYM, SYM, [2.0, 0.0]).region == BOUNDARY

    def test_n3_sym_masses(self):
        # midpoint rule over the ordered sector, then the six sectors of the plane
        poly = polygon_n3(SYM, SYM)
        x0, x1, y0, y1 = poly.bbox()
        k = 600
        xs = np.linspace(x0, x1, k + 1)
        ys = np.linspace(y0, y1, k + 1)
        X, Y = np.meshgrid((xs[:-1] + xs[1:]) / 2, (ys[:-1] + ys[1:]) / 2, indexing="ij")
        free = np.column_stack([X.ravel(), Y.ravel()])
        cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
        ordered = analytic.hermitian_density(SYM, SYM, free, ordered=True).sum() * cell / 6
        assert ordered == pytest.approx(1 / 6, abs=2e-3)
        lo, hi = -2.5, 2.5
        xs = np.linspace(lo, hi, 2 * k + 1)
        X, Y = np.meshgrid((xs[:-1] + xs[1:]) / 2, (xs[:-1] + xs[1:]) / 2, indexing="ij")
        total = analytic.hermitian_density(SYM, SYM, np.column_stack([X.ravel(), Y.ravel()])).sum()
        assert total * (xs[1] - xs[0]) ** 2 == pytest.approx(1.0, abs=5e-3)

    def test_region_agrees_with_support(self):
        rng = np.random.default_rng(8)
        a, b = SPEC_C
        for g in plane_points(a, b, 500, rng):
            v = pdf_hermitian(a, b, g[:2])
            gs = np.sort(g)[::-1]
            assert (v.region != OUTSIDE) == check_horn(a, b, gs).inside

    @given(st.floats(-3, 3))
    @settings(max_examples=20, deadline=None)
    def test_shift_covariance(self, c):
        rng = np.random.default_rng(9)
        a, b = SPEC_C
        for g in plane_points(a, b, 20, rng):
            v0 = pdf_hermitian(a, b, g[:2]).value
            v1 = pdf_hermitian(np.add(a, c), b, g[:2] + c).value
            assert v1 == pytest.approx(v0, rel=1e-9, abs=1e-9)

    def test_swap_symmetry(self):
        rng = np.random.default_rng(10)
        for g in plane_points(A4, B4, 100, rng):
            assert pdf_hermitian(A4, B4, g[:3]).value == pytest.approx(pdf_hermitian(B4, A4, g[:3]).value, abs=1e-12)

    def test_permutation_invariant(self):
        g = (1.1, 0.2)
        full = (1.1, 0.2, -1.3)
        perm = (full[2], full[0])
        assert pdf_hermitian(SYM, SYM, g).value == pytest.approx(pdf_hermitian(SYM, SYM, perm).value)

    def test_n5_unsupported(self):
        with pytest.raises(UnsupportedCaseError):
            pdf_hermitian((4, 3, 2, 1, 0), (4, 3, 2, 1, 0), [5, 4, 3, 2])


class TestSymmetricN2:
    def test_example(self):
        v = pdf_symmetric_n2((1, 0), (2, 0), 2.0)
        assert v.value == pytest.approx(4 / (math.pi * math.sqrt(15)))
        assert v.region == INTERIOR

    def test_top_edge_singular(self):
        v = pdf_symmetric_n2((1, 0), (1, 0), 2.0)
        assert math.isinf(v.value) and v.singular and v.region == BOUNDARY
        assert pdf_symmetric_n2((1, 0), (1, 0), 2.0 - 1e-8).value > 1e3

    def test_bottom_edge_finite_when_equal_gaps(self):
        v = pdf_symmetric_n2((1, 0), (1, 0), 0.0)
        assert v.value == pytest.approx(1 / math.pi)
        assert pdf_symmetric_n2((1, 0), (1, 0), 1e-6).value == pytest.approx(1 / math.pi, rel=1e-6)

    def test_bottom_edge_singular_otherwise(self):
        assert math.isinf(pdf_symmetric_n2((1, 0), (2, 0), 1.0).value)

    def test_outside(self):
        assert pdf_symmetric_n2((1, 0), (2, 0), 3.5).value == 0.0

    @given(st.floats(0.1, 3), st.floats(0.1, 3))
    @settings(max_examples=20, deadline=None)
    def test_mass_oracle(self, a12, b12):
        assert oracles.symmetric_n2_mass(a12, b12) == pytest.approx(1.0, abs=1e-8)

    def test_cdf_matches_density(self):
        from scipy import integrate
        m, M = 1.0, 3.0
        for g in (1.3, 2.0, 2.9):
            num, _ = integrate.quad(lambda x: symmetric_n2_density(m, M, x), m, g, limit=200)
            assert symmetric_n2_cdf(m, M, g) == pytest.approx(num, abs=1e-7)


class TestSkew:
    def test_so2_atom(self):
        atoms = pdf_skew([1.5], [0.7], group="SO_even")
        assert isinstance(atoms, Atoms)
        assert atoms.points == (2.2,) and atoms.weights == (1.0,)

    def test_o2_atoms(self):
        atoms = pdf_skew([1.5], [0.5], group="O_even")
        assert sorted(atoms.points) == pytest.approx([-2.0, -1.0, 1.0, 2.0])
        assert atoms.weights == (0.25,) * 4
        folded = pdf_skew([1.5], [0.5], group="O_even", canonical=True)
        assert folded.points == (1.0, 2.0) and folded.weights == (0.5, 0.5)

    def test_odd_example(self):
        v = pdf_skew([1.0], [2.0], [2.5], group="SO_odd")
        assert v.value == pytest.approx(0.3125)
        assert pdf_skew([1.0], [2.0], [-2.5], group="O_odd").value == pytest.approx(0.3125)
        assert pdf_skew([1.0], [2.0], [3.5], group="O_odd").value == 0.0

    def test_odd_matches_gap_law(self):
        for g in (1.1, 2.0, 2.9):
            v = pdf_skew([1.0], [2.0], [g], group="O_odd", canonical=True).value
            assert v == pytest.approx(float(oracles.gap_pdf_unitary(1.0, 2.0, g)))

    def test_so4_interior_example(self):
        # the point (2.5, 1) sits on the end of the difference interval;
        # approaching from inside gives the full value, on the edge the indicator is 1/2
        inner = pdf_skew([2, 1], [1, 0.5], [2.5, 1 + 1e-12], group="SO_even").value
        assert inner == pytest.approx(0.2916666666, rel=1e-9)
        edge = pdf_skew([2, 1], [1, 0.5], [2.5, 1.0], group="SO_even")
        assert edge.value == pytest.approx(0.2916666666 / 2, rel=1e-9)
        assert edge.region == BOUNDARY

    def test_so4_vs_split_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            g1, g2 = rng.uniform(0, 3.5), rng.uniform(-2, 2)
            if abs(g2) > g1:
                continue
            v = pdf_skew([2, 1], [1, 0.5], [g1, g2], group="SO_even", canonical=True).value
            assert v == pytest.approx(float(oracles.so4_canonical_density((2, 1), (1, 0.5), g1, g2)), abs=1e-12)

    def test_o4_vs_split_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            g1, g2 = rng.uniform(0, 3.5), rng.uniform(0, 2)
            if g2 > g1:
                continue
            v = pdf_skew([2, 1], [1, 0.5], [g1, g2], group="O_even", canonical=True).value
            assert v == pytest.approx(float(oracles.o4_canonical_density((2, 1), (1, 0.5), g1, g2)), abs=1e-12)

    def test_swap_symmetry(self):
        for grp in ("SO_even", "O_even"):
            a = pdf_skew([2, 1], [1, 0.5], [2.2, 0.9], group=grp).value
            b = pdf_skew([1, 0.5], [2, 1], [2.2, 0.9], group=grp).value
            assert a == pytest.approx(b, abs=1e-12)

    def test_n6_unsupported(self):
        with pytest.raises(UnsupportedCaseError):
            pdf_skew([3, 2, 1], [3, 2, 1], [4, 3, 2], group="SO_even")

    def test_group_required(self):
        with pytest.raises(HornError):
            pdf_skew([2, 1], [1, 0.5], [2, 1])


class TestEnhancementLines:
    def test_symmetric_spectra(self):
        segs = enhancement_lines_n3(SYM, SYM)
        lines = set()
        for s in segs:
            (x0, y0), (x1, y1) = s.start, s.end
            if abs(x0 - x1) < 1e-12:
                lines.add(("g1", round(x0, 9)))
            elif abs(y0 - y1) < 1e-12:
                lines.add(("g2", round(y0, 9)))
            elif abs((x0 + y0) - (x1 + y1)) < 1e-12:
                lines.add(("g1+g2", round(x0 + y0, 9)))
        assert {("g1", 1.0), ("g2", 0.0), ("g1+g2", 1.0)} <= lines

    @given(spectra(3), spectra(3))
    @settings(max_examples=25, deadline=None)
    def test_swap_invariant(self, a, b):
        key = lambda segs: sorted((tuple(np.round(s.start, 9)), tuple(np.round(s.end, 9))) for s in segs)  # noqa: E731
        assert key(enhancement_lines_n3(a, b)) == key(enhancement_lines_n3(b, a))

    @given(spectra(3), spectra(3))
    @settings(max_examples=25, deadline=None)
    def test_clipped_to_polygon(self, a, b):
        poly = polygon_n3(a, b)
        scale = 1e-9 * max(1.0, np.abs(a).max() + np.abs(b).max())
        for s in enhancement_lines_n3(a, b):
            assert poly.contains(np.array([s.start, s.end]), tol=scale).all()

    def test_at_most_seven(self):
        assert len(enhancement_lines_n3(*SPEC_C)) <= 7
