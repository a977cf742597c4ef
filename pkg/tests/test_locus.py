"""Intersection loci, weighted volume integrals, bounds, strip volumes."""

import math

import numpy as np
import pytest

from horoflow.busemann import BusemannField, busemann_value
from horoflow.locus import (
    EmptyLocusError,
    VisibilityError,
    beta_bound_check,
    dw_ds_check,
    integral_v,
    integral_w,
    make_pair_config,
    parametrize_locus,
    strip_volume,
    strip_volume_mc,
    volume_locus,
    volume_upper_bound,
)
from horoflow.manifold import (
    HYPERBOLIC,
    BoundaryConfigError,
    GeometryError,
    ModelSpace,
    Point,
    boundary_direction,
    boundary_finite,
    boundary_infinity,
)
from horoflow.numerics import unit_sphere_area


@pytest.fixture
def cfg_normalized(h3, base3):
    f1 = BusemannField(h3, boundary_finite(h3, [0.0, 0.0]), base3)
    f2 = BusemannField(h3, boundary_infinity(h3), base3)
    return make_pair_config(f1, f2)


@pytest.fixture
def cfg_example(h3, base3):
    f1 = BusemannField(h3, boundary_finite(h3, [1.0, 0.0]), base3)
    f2 = BusemannField(h3, boundary_finite(h3, [-1.0, 0.0]), base3)
    return make_pair_config(f1, f2)


@pytest.fixture
def cfg_h2(h2):
    base = Point(h2, [0.0, 1.0])
    f1 = BusemannField(h2, boundary_finite(h2, [0.0]), base)
    f2 = BusemannField(h2, boundary_infinity(h2), base)
    return make_pair_config(f1, f2)


class TestPairConfig:
    def test_normalized_axis_constant(self, cfg_normalized):
        assert cfg_normalized.c0 == pytest.approx(0.0, abs=1e-12)
        # b1 + b2 computed along the axis stays at c0
        for z in (0.2, 0.7, 3.0):
            x = cfg_normalized.axis_point(z)
            total = (busemann_value(cfg_normalized.f1, x)
                     + busemann_value(cfg_normalized.f2, x))
            assert total == pytest.approx(cfg_normalized.c0, abs=1e-10)

    def test_example_pair_symmetric(self, cfg_example, base3):
        # the basepoint sits on the bi-asymptotic geodesic, so c0 = 0
        assert cfg_example.c0 == pytest.approx(0.0, abs=1e-12)
        assert cfg_example.on_axis(base3)

    def test_euclidean_rejected(self, e3):
        f1 = BusemannField(e3, boundary_direction(e3, [1, 0, 0]), Point(e3, [0, 0, 0]))
        f2 = BusemannField(e3, boundary_direction(e3, [0, 1, 0]), Point(e3, [0, 0, 0]))
        with pytest.raises(VisibilityError):
            make_pair_config(f1, f2)

    def test_coincident_points_rejected(self, h3, base3):
        f = BusemannField(h3, boundary_finite(h3, [1.0, 0.0]), base3)
        with pytest.raises(BoundaryConfigError):
            make_pair_config(f, f)

    def test_offset_basepoints_shift_c0(self, h3):
        # moving a basepoint changes the value normalization, hence c0
        f1 = BusemannField(h3, boundary_finite(h3, [0.0, 0.0]), Point(h3, [0, 0, 2]))
        f2 = BusemannField(h3, boundary_infinity(h3), Point(h3, [0, 0, 1]))
        cfg = make_pair_config(f1, f2)
        assert cfg.c0 == pytest.approx(-math.log(2.0), abs=1e-12)

    def test_separation_nonnegative(self, cfg_normalized, h3, rng):
        pts = h3.random_points(rng, 500, 1.2)
        for c in pts[:20]:
            assert cfg_normalized.separation(Point(h3, c)) >= -1e-12


class TestLocusGeometry:
    def test_membership_residuals(self, cfg_normalized):
        for s in (0.5, math.log(2.0), 2.0):
            for t in (-3.0, 0.0, 3.0):
                L = parametrize_locus(cfg_normalized, s, t)
                assert L.membership_residual() <= 1e-10

    def test_normalized_radius_height(self, cfg_normalized):
        # ln(2r/a) = s and ln(2ra) = t in normalized coordinates
        L = parametrize_locus(cfg_normalized, math.log(2.0), math.log(2.0))
        assert L.height == pytest.approx(1.0, abs=1e-14)
        assert L.radius == pytest.approx(1.0, abs=1e-14)

    def test_rho_over_height_invariant(self, cfg_normalized):
        for s in (0.3, 1.0, 2.5):
            for t in (-2.0, 0.0, 2.0):
                L = parametrize_locus(cfg_normalized, s, t)
                assert L.radius / L.height == pytest.approx(math.sqrt(math.exp(s) - 1.0), rel=1e-13)

    def test_degenerate_and_empty(self, cfg_normalized):
        L0 = parametrize_locus(cfg_normalized, 0.0, 0.4)
        assert L0.degenerate
        assert volume_locus(L0) == 0.0
        with pytest.raises(EmptyLocusError):
            parametrize_locus(cfg_normalized, -0.2, 0.0)

    def test_beta_constant_on_locus(self, cfg_normalized):
        L = parametrize_locus(cfg_normalized, 1.2, -0.8)
        b = L.beta_values()
        assert np.max(np.abs(b - (1.0 - 2.0 * math.exp(-1.2)))) <= 1e-12


class TestWeightedIntegrals:
    def test_h3_closed_forms(self, cfg_normalized):
        for s in (0.5, math.log(2.0), 2.0):
            L = parametrize_locus(cfg_normalized, s, 0.7)
            e = math.exp(s) - 1.0
            assert volume_locus(L) == pytest.approx(2.0 * math.pi * math.sqrt(e), rel=1e-12)
            assert integral_v(L) == pytest.approx(2.0 * math.pi, rel=1e-12)
            assert integral_w(L) == pytest.approx(2.0 * math.pi * e, rel=1e-12)

    def test_t_invariance(self, cfg_normalized):
        for s in (0.5, math.log(2.0), 2.0):
            vs = [integral_v(parametrize_locus(cfg_normalized, s, t)) for t in (-3, -1, 0, 1, 3)]
            ws = [integral_w(parametrize_locus(cfg_normalized, s, t)) for t in (-3, -1, 0, 1, 3)]
            assert (max(vs) - min(vs)) / vs[0] <= 1e-8
            assert (max(ws) - min(ws)) / ws[0] <= 1e-8

    def test_general_coordinates_crosscheck(self, cfg_example):
        L = parametrize_locus(cfg_example, 1.3, 0.7, nodes=128)
        assert volume_locus(L, "general") == pytest.approx(volume_locus(L), abs=1e-8)
        assert integral_v(L, "general") == pytest.approx(integral_v(L), abs=1e-8)
        assert integral_w(L, "general") == pytest.approx(integral_w(L), abs=1e-8)

    def test_h2_two_point_sums(self, cfg_h2):
        s = 0.8
        L = parametrize_locus(cfg_h2, s, 0.4)
        assert L.points().shape == (2, 2)
        e = math.exp(s) - 1.0
        assert volume_locus(L) == pytest.approx(2.0, abs=1e-14)
        assert integral_v(L) == pytest.approx(2.0 / math.sqrt(e), rel=1e-12)
        assert integral_w(L) == pytest.approx(2.0 * math.sqrt(e), rel=1e-12)
        # t-invariance survives in the degenerate counting case
        vs = [integral_v(parametrize_locus(cfg_h2, s, t)) for t in (-2, 0, 2)]
        assert max(vs) - min(vs) <= 1e-12

    def test_h5_closed_forms(self):
        h5 = ModelSpace(HYPERBOLIC, 5)
        base = Point(h5, [0, 0, 0, 0, 1])
        f1 = BusemannField(h5, boundary_finite(h5, [0, 0, 0, 0]), base)
        f2 = BusemannField(h5, boundary_infinity(h5), base)
        cfg = make_pair_config(f1, f2)
        s = 1.1
        L = parametrize_locus(cfg, s, -0.6, nodes=32)
        e = math.exp(s) - 1.0
        area = unit_sphere_area(3)
        assert volume_locus(L) == pytest.approx(area * e ** 1.5, rel=1e-9)
        assert integral_v(L) == pytest.approx(area * e, rel=1e-9)
        assert integral_w(L) == pytest.approx(area * e ** 2, rel=1e-9)


class TestGrowthAndBounds:
    def test_dw_ds(self, cfg_normalized):
        for s, expected in ((math.log(2.0), 4.0 * math.pi), (1.0, 2.0 * math.pi * math.e)):
            lhs, rhs = dw_ds_check(cfg_normalized, s, 0.3)
            assert rhs == pytest.approx(expected, rel=1e-10)
            assert lhs == pytest.approx(rhs, rel=1e-4)

    def test_dw_ds_step_guard(self, cfg_normalized):
        with pytest.raises(GeometryError):
            dw_ds_check(cfg_normalized, 1e-4, 0.0)

    def test_volume_bound_and_equality_point(self, cfg_normalized):
        vol, bound = volume_upper_bound(cfg_normalized, math.log(2.0), 1.3)
        assert vol <= bound + 1e-9
        assert vol == pytest.approx(bound, abs=1e-8)  # equality exactly at s = ln 2
        vol2, bound2 = volume_upper_bound(cfg_normalized, 3.0, -2.0)
        assert vol2 == pytest.approx(2.0 * math.pi * math.sqrt(math.e ** 3 - 1.0), rel=1e-10)
        assert bound2 == pytest.approx(math.pi * math.e ** 3, rel=1e-10)
        assert vol2 < bound2

    def test_beta_bound(self, cfg_normalized, cfg_h2):
        for s in (0.1, 1.0, 3.0):
            assert beta_bound_check(parametrize_locus(cfg_normalized, s, 0.0))
            # h = 1 in the plane: the bound is attained exactly
            assert beta_bound_check(parametrize_locus(cfg_h2, s, 0.0))

    def test_volume_monotone(self, cfg_normalized):
        vols = [volume_locus(parametrize_locus(cfg_normalized, s, 0.0))
                for s in (0.5, 1.0, 1.5, 2.0)]
        assert all(b > a for a, b in zip(vols, vols[1:]))


class TestWorkedExample:
    def test_circle_equation(self, cfg_example):
        s = 2.0 * math.log(5.0 / 4.0)
        L = parametrize_locus(cfg_example, s, 0.0)
        pts = L.points()
        assert np.max(np.abs(pts[:, 0])) <= 1e-10
        assert np.max(np.abs(pts[:, 1] ** 2 + (pts[:, 2] - 1.25) ** 2 - 9.0 / 16.0)) <= 1e-10

    def test_length_and_bound(self, cfg_example):
        s = 2.0 * math.log(5.0 / 4.0)
        L = parametrize_locus(cfg_example, s, 0.0)
        length = volume_locus(L)
        assert length == pytest.approx(1.5 * math.pi, abs=1e-9)
        assert length < 3.0 * math.pi
        vol, bound = volume_upper_bound(cfg_example, s, 0.0)
        assert bound == pytest.approx(25.0 * math.pi / 16.0, rel=1e-12)
        assert vol <= bound

    def test_parametrized_line_integral_oracle(self):
        # the circle y = (3/4) cos t, z = (3/4) sin t + 5/4 has the length
        # integral of 3/(3 sin t + 5); closed form 2 pi a / sqrt(a^2 - b^2)
        theta = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        quad = float(np.mean(3.0 / (3.0 * np.sin(theta) + 5.0))) * 2.0 * math.pi
        residue = 3.0 * 2.0 * math.pi / math.sqrt(25.0 - 9.0)
        assert quad == pytest.approx(residue, abs=1e-13)
        assert quad == pytest.approx(1.5 * math.pi, abs=1e-13)


class TestStripVolume:
    def test_quadrature_matches_section_integral(self, cfg_normalized):
        # in this model I(s) = pi e^s, so the sliced volume integrates
        # min(sigma, 2r - sigma) pi e^{s1 + sigma}
        c1 = c2 = 0.5 * math.log(2.0)
        r = 0.5
        val = strip_volume(cfg_normalized, c1, c2, r)
        s1 = math.log(2.0)
        xs = np.linspace(0.0, 2.0 * r, 40001)
        ys = np.minimum(xs, 2.0 * r - xs) * math.pi * np.exp(s1 + xs)
        reference = float(np.trapezoid(ys, xs))
        assert val == pytest.approx(reference, rel=1e-8)

    def test_mc_crosscheck(self, cfg_normalized):
        c1 = c2 = 0.5 * math.log(2.0)
        r = 0.5
        quad = strip_volume(cfg_normalized, c1, c2, r)
        mc = strip_volume_mc(cfg_normalized, c1, c2, r, n_samples=300_000, seed=11)
        assert mc.agrees_with(quad, sigmas=3.0)

    def test_level_difference_invariance(self, cfg_normalized):
        c1 = c2 = 0.5 * math.log(2.0)
        r = 0.5
        base = strip_volume(cfg_normalized, c1, c2, r)
        for shift in (0.5, 1.0, -1.0):
            moved = strip_volume(cfg_normalized, c1 + shift, c2 - shift, r)
            assert abs(moved - base) / base <= 1e-8

    def test_small_width_quadratic_scaling(self, cfg_normalized):
        c1 = c2 = 0.5 * math.log(2.0)
        v1 = strip_volume(cfg_normalized, c1, c2, 0.02)
        v2 = strip_volume(cfg_normalized, c1, c2, 0.01)
        # volume ~ r^2 I(s1) for small widths
        assert v1 / v2 == pytest.approx(4.0, rel=5e-2)

    def test_axis_touching_rejected(self, cfg_normalized):
        with pytest.raises(GeometryError):
            strip_volume(cfg_normalized, 0.0, 0.0, 0.5)
        with pytest.raises(GeometryError):
            strip_volume(cfg_normalized, 0.3, 0.3, -1.0)
