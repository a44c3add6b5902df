import math

import numpy as np
import pytest

from wetperc.analytics import (
    LAMBDA_C_UNIT,
    LAMBDA_C_UNIT_BRACKET,
    approx_gilbert,
    approx_inner_city,
    approx_star,
    bounds_report,
    capex_report,
    effective_active_density,
    full_coverage_density,
    g_functions,
    inner_envelope_area,
    lambda_c_unit,
    lower_bound_density,
    lower_bound_threshold,
    outer_envelope_area,
    percolation_threshold,
    upper_bound_density,
    upper_bound_threshold,
)
from wetperc.geometry import ParameterError, Region


def radii_grid():
    for r_r in np.linspace(2.0, 60.0, 20):
        for r_f in np.linspace(2.0, 120.0, 20):
            if r_r <= r_f:
                yield float(r_r), float(r_f)


class TestLambdaCUnit:
    def test_value(self):
        assert lambda_c_unit() == pytest.approx(0.8825424006, abs=1e-9)

    def test_within_rigorous_bracket(self):
        lo, hi = LAMBDA_C_UNIT_BRACKET
        assert lo < lambda_c_unit() < hi

    def test_quarter_pi_identity(self):
        assert abs(math.pi / 4.0 * lambda_c_unit() - math.log(2.0)) < 1e-15

    def test_log2_over_constant_is_quarter_pi(self):
        assert abs(math.log(2.0) / lambda_c_unit() - math.pi / 4.0) < 1e-15


class TestEnvelopeAreas:
    def test_outer_at_reference_radii(self):
        assert outer_envelope_area(20, 40) == pytest.approx(10865.78, abs=0.01)

    def test_inner_at_reference_radii(self):
        assert inner_envelope_area(20, 40) == pytest.approx(3775.9, abs=0.5)

    def test_radii_order_enforced(self):
        for fn in (outer_envelope_area, inner_envelope_area):
            with pytest.raises(ParameterError):
                fn(50, 40)

    def test_area_sandwich_on_grid(self):
        for r_r, r_f in radii_grid():
            disk = math.pi * r_f * r_f
            assert inner_envelope_area(r_r, r_f) < disk < outer_envelope_area(r_r, r_f)

    def test_degenerate_small_link_range(self):
        disk = math.pi * 40.0 * 40.0
        assert outer_envelope_area(1e-9, 40) == pytest.approx(disk, rel=1e-6)
        assert inner_envelope_area(1e-9, 40) == pytest.approx(disk, rel=1e-6)


class TestLowerBound:
    def test_threshold_value(self):
        assert lower_bound_threshold(20) == pytest.approx(6.670e-4, rel=1e-3)

    def test_undefined_below_threshold(self):
        assert lower_bound_density(6e-4, 20, 40) is None

    def test_dense_device_limit(self):
        limit = math.log(2.0) / outer_envelope_area(20, 40)
        assert limit == pytest.approx(6.379e-5, rel=1e-3)
        val = lower_bound_density(1000.0 / 400.0, 20, 40)
        assert abs(val - limit) / limit < 1e-6

    def test_monotone_nonincreasing(self):
        grid = np.geomspace(7e-4, 1.0, 60)
        vals = [lower_bound_density(lr, 20, 40) for lr in grid]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


class TestUpperBound:
    def test_threshold_value(self):
        assert upper_bound_threshold(20) == pytest.approx(8.671e-3, rel=1e-3)

    def test_undefined_below_threshold(self):
        assert upper_bound_density(8e-3, 20, 40) is None

    def test_dense_device_limit(self):
        limit = math.log(2.0) / inner_envelope_area(20, 40)
        assert limit == pytest.approx(1.836e-4, rel=1e-3)
        val = upper_bound_density(1000.0 / 400.0, 20, 40)
        assert abs(val - limit) / limit < 1e-6

    def test_upper_exceeds_lower_where_both_defined(self):
        for lr in np.geomspace(9e-3, 1.0, 40):
            lo = lower_bound_density(lr, 20, 40)
            hi = upper_bound_density(lr, 20, 40)
            assert lo < hi


class TestEffectiveActiveDensity:
    def test_no_stations(self):
        assert effective_active_density(0.01, 0.0, 40) == 0.0

    def test_saturates_at_device_density(self):
        assert effective_active_density(0.01, 1e3, 40) == pytest.approx(0.01)

    def test_reference_point(self):
        val = effective_active_density(0.01, 1.378e-4, 40)
        assert val == pytest.approx(4.998e-3, rel=1e-3)


class TestApproximations:
    def test_inner_city_reference(self):
        assert approx_inner_city(0.005, 20, 40) == pytest.approx(1.158e-4, rel=1e-3)

    def test_inner_city_vanishes_for_dense_devices(self):
        vals = [approx_inner_city(lr, 20, 40) for lr in (1e2, 1e4, 1e6, 1e8)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-12

    def test_inner_city_blows_up_at_threshold(self):
        thr = percolation_threshold(20)
        previous = 0.0
        for eps in (1e-2, 1e-4, 1e-6):
            val = approx_inner_city(thr * (1 + eps), 20, 40)
            assert val > previous
            previous = val
        assert previous > 1e-3

    def test_inner_city_undefined_at_or_below_threshold(self):
        thr = percolation_threshold(20)
        assert approx_inner_city(thr, 20, 40) is None
        assert approx_inner_city(thr * 0.5, 20, 40) is None

    def test_gilbert_reference(self):
        assert approx_gilbert(20, 40) == pytest.approx(8.825e-5, rel=1e-3)

    def test_gilbert_scaling(self):
        assert approx_gilbert(40, 80) == pytest.approx(approx_gilbert(20, 40) / 4.0)

    def test_star_reference(self):
        assert approx_star(0.01, 20, 40) == pytest.approx(9.414e-5, rel=1e-3)

    def test_star_matches_gilbert_for_dense_devices(self):
        star = approx_star(1000.0 / 400.0, 20, 40)
        gd = approx_gilbert(20, 40)
        assert abs(star - gd) / gd < 1e-9

    def test_star_undefined_below_threshold(self):
        assert approx_star(percolation_threshold(20) * 0.9, 20, 40) is None

    def test_star_to_inner_city_ratio_near_threshold(self):
        # convergence is logarithmic: approach the threshold very closely
        r_r, r_f = 1.0, 100.0
        thr = percolation_threshold(r_r)
        ratios = []
        for eps in (1e-6, 1e-7, 1e-8):
            lr = thr * (1.0 + eps)
            ratios.append(approx_star(lr, r_r, r_f) / approx_inner_city(lr, r_r, r_f))
        assert abs(ratios[-1] - 1.0) < 0.01
        gaps = [abs(r - 1.0) for r in ratios]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_constant_override_consistent(self):
        lc = 1.44
        assert approx_gilbert(20, 40, lc1=lc) == pytest.approx(lc / 10000.0)
        star = approx_star(2.5, 20, 40, lc1=lc)
        assert abs(star - approx_gilbert(20, 40, lc1=lc)) / star < 1e-6


class TestGFunctions:
    def test_unity_at_zero(self):
        g_l, g_u = g_functions(0.0)
        assert abs(g_l - 1.0) < 1e-12
        assert abs(g_u - 1.0) < 1e-12

    def test_reference_at_half(self):
        g_l, _ = g_functions(0.5)
        assert g_l == pytest.approx(2.1617, abs=1e-4)

    def test_inner_below_outer_on_domain(self):
        for gamma in np.linspace(0.01, 1.0, 50):
            g_l, g_u = g_functions(float(gamma))
            assert g_u < g_l

    def test_domain_enforced(self):
        for gamma in (-0.1, 1.1):
            with pytest.raises(ParameterError):
                g_functions(gamma)


class TestBoundsReport:
    def test_all_defined_and_ordered(self):
        rep = bounds_report(0.01, 20, 40)
        assert rep.notes == {}
        assert rep.lambda_f_lower < rep.lambda_f_star < rep.lambda_f_upper

    def test_upper_undefined_at_low_density(self):
        rep = bounds_report(1e-3, 20, 40)
        assert rep.lambda_f_upper is None
        assert rep.lambda_f_lower is not None
        assert "lambda_f_upper" in rep.notes
        assert "0.00867" in rep.notes["lambda_f_upper"]

    def test_ic_and_star_undefined_below_unit_threshold(self):
        rep = bounds_report(percolation_threshold(20) * 0.5, 20, 40)
        assert rep.lambda_f_ic is None
        assert rep.lambda_f_star is None

    def test_ordering_across_grid(self):
        for lr in np.geomspace(9e-3, 0.5, 30):
            rep = bounds_report(float(lr), 20, 40)
            assert rep.lambda_f_lower < rep.lambda_f_star < rep.lambda_f_upper

    def test_all_columns_nonincreasing_in_device_density(self):
        grid = np.geomspace(9e-3, 1.0, 50)
        reports = [bounds_report(float(lr), 20, 40) for lr in grid]
        for name in ("lambda_f_lower", "lambda_f_upper", "lambda_f_ic",
                     "lambda_f_gd", "lambda_f_star"):
            vals = [getattr(r, name) for r in reports]
            assert all(a >= b - 1e-18 for a, b in zip(vals, vals[1:])), name


class TestCapexReport:
    REGION = Region(4000, 4000)

    def test_full_coverage_density(self):
        assert full_coverage_density(40) == 3.125e-4

    def test_legacy_discussion_mode(self):
        rep = capex_report(0.01, 20, 40, self.REGION, mode="gilbert-alt")
        assert rep.planned_density == pytest.approx(1.378e-4, rel=1e-3)
        assert rep.full_coverage_density == 3.125e-4
        assert rep.density_ratio == pytest.approx(2.27, abs=0.01)
        assert rep.stations_saved > 2700
        assert rep.uncovered_probability == pytest.approx(0.500, abs=0.001)

    def test_gilbert_mode(self):
        rep = capex_report(0.01, 20, 40, self.REGION, mode="gilbert")
        assert rep.planned_density == pytest.approx(8.83e-5, rel=1e-3)
        assert rep.density_ratio == pytest.approx(3.54, abs=0.01)

    def test_star_mode_default(self):
        rep = capex_report(0.01, 20, 40, self.REGION)
        assert rep.mode == "star"
        assert rep.planned_density == pytest.approx(9.414e-5, rel=1e-3)

    def test_star_mode_needs_supercritical_devices(self):
        with pytest.raises(ParameterError):
            capex_report(1e-4, 20, 40, self.REGION)

    def test_region_scale_coverage(self):
        # a charging range on the region scale makes the plan nearly free
        rep = capex_report(5.0, 10, 4000, Region(4000, 4000), mode="gilbert")
        assert rep.stations_saved == pytest.approx(
            (rep.full_coverage_density - rep.planned_density) * 16e6)
        assert rep.planned_density < rep.full_coverage_density

    def test_unknown_mode(self):
        with pytest.raises(ParameterError):
            capex_report(0.01, 20, 40, self.REGION, mode="bogus")
