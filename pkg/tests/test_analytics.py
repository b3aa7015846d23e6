import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnpqkd import (
    DetectorSpec,
    FiberSpec,
    InterferometerSpec,
    ParameterError,
    SolverError,
    StrayLightModel,
    SystemConfig,
    analytic_click_prob,
    analytic_qber,
    analytic_visibility,
    calibrate_intrinsic_visibility,
    distance_sweep,
    fidelity,
    fringe_scan,
    improvement_equivalent_db,
    max_secure_distance,
    qber_from_fidelity,
    visibility,
)
from pnpqkd.analytics import default_phase_grid

from conftest import make_noiseless


def test_visibility():
    assert visibility(0.915, 0.085) == pytest.approx(0.83)
    assert visibility(3.0, 3.0) == 0.0
    assert visibility(3.0, 0.0) == 1.0
    with pytest.raises(ParameterError):
        visibility(0.0, 0.0)
    with pytest.raises(ParameterError):
        visibility(0.1, 0.2)


def test_fidelity_and_qber():
    assert fidelity(0.83) == pytest.approx(0.915)
    assert fidelity(1.0) == 1.0 and fidelity(0.0) == 0.5
    assert qber_from_fidelity(0.915) == pytest.approx(0.085)
    assert qber_from_fidelity(1.0) == 0.0
    for bad in (-0.1, 1.1):
        with pytest.raises(ParameterError):
            fidelity(bad)
        with pytest.raises(ParameterError):
            qber_from_fidelity(bad)


@given(st.floats(0, 1))
def test_qber_is_half_invisibility(v):
    assert qber_from_fidelity(fidelity(v)) == pytest.approx((1 - v) / 2, abs=1e-15)


@given(st.floats(1e-9, 1e3), st.floats(0, 1e3), st.floats(1e-6, 1e6))
def test_visibility_scale_invariant(a, b, k):
    hi, lo = max(a, b), min(a, b)
    assert visibility(k * hi, k * lo) == pytest.approx(visibility(hi, lo), abs=1e-12)


class TestClickProb:
    def test_zero_distance_noiseless(self, noiseless):
        p_max, p_min, p_raw = analytic_click_prob(noiseless, 0.0)
        assert p_max == pytest.approx(-math.expm1(-0.01), rel=1e-12)
        assert p_max == pytest.approx(0.01 - 0.01**2 / 2 + 0.01**3 / 6 - 0.01**4 / 24, rel=1e-9)
        assert p_min == 0.0
        assert p_raw == pytest.approx(p_max, rel=1e-12)

    def test_100km_small_signal(self, defaults):
        p_max, p_min, _ = analytic_click_prob(defaults, 100.0)
        x = 0.1 * 0.1 * 10 ** -2.5
        assert p_max + p_min == pytest.approx(x + 2 * 8e-7, rel=1e-4)

    def test_far_limit(self, defaults):
        p_max, p_min, p_raw = analytic_click_prob(defaults, 5000.0)
        assert p_max == p_min == pytest.approx(8e-7, rel=1e-12)
        assert p_raw == pytest.approx(1 - (1 - 8e-7) ** 2, rel=1e-12)

    def test_bad_distance(self, defaults):
        with pytest.raises(ParameterError):
            analytic_click_prob(defaults, -1.0)


class TestVisibilityAndQber:
    def test_undiluted(self, defaults):
        cfg = make_noiseless(defaults, 0.87)
        for d in (0.0, 100.0, 300.0):
            assert analytic_visibility(cfg, d) == pytest.approx(0.87, rel=1e-9)

    def test_100km(self, defaults):
        assert analytic_visibility(defaults, 100.0) == pytest.approx(0.83, abs=0.005)
        assert analytic_qber(defaults, 100.0) <= 0.10

    def test_far(self, defaults):
        assert analytic_visibility(defaults, 1000.0) == pytest.approx(0.0, abs=1e-12)

    def test_perfect_link(self, noiseless):
        assert analytic_qber(noiseless, 50.0) == 0.0

    def test_qber_grid_monotone(self, defaults):
        q = [analytic_qber(defaults, d) for d in np.linspace(0, 200, 401)]
        assert np.all(np.diff(q) >= -1e-15)


@st.composite
def link_configs(draw):
    det = DetectorSpec(draw(st.floats(0.01, 1)), draw(st.floats(0, 1e-3)))
    return SystemConfig(
        fiber=FiberSpec(100.0, draw(st.floats(0.05, 1.0))),
        interferometer=InterferometerSpec(draw(st.floats(0.0, 1.0))),
        detector1=det, detector2=det,
        mean_photon_number=draw(st.floats(1e-3, 1.0)),
        stray=StrayLightModel(draw(st.floats(0, 1e-4)), enabled=draw(st.booleans())),
    )


@settings(max_examples=60, deadline=None)
@given(link_configs())
def test_monotone_in_distance(cfg):
    grid = np.linspace(0, 300, 121)
    v = np.array([analytic_visibility(cfg, d) for d in grid])
    q = np.array([analytic_qber(cfg, d) for d in grid])
    assert np.all(np.diff(v) <= 1e-12)
    assert np.all(np.diff(q) >= -1e-12)


class TestMaxSecureDistance:
    def test_paper_projection(self, defaults):
        d = max_secure_distance(defaults.without_stray())
        assert 125 <= d <= 155

    def test_low_loss_fibre(self, defaults):
        base = defaults.without_stray()
        d25 = max_secure_distance(base)
        d17 = max_secure_distance(replace(base, fiber=FiberSpec(100, 0.17)))
        assert d17 == pytest.approx(d25 * 0.25 / 0.17, abs=0.5)
        assert d17 > 190

    def test_fixed_point(self, defaults):
        assert max_secure_distance(defaults, analytic_qber(defaults, 100.0)) == pytest.approx(100.0, abs=0.1)

    def test_halving_loss_doubles(self, defaults):
        base = defaults.without_stray()
        d = max_secure_distance(base, tol_km=1e-3)
        half = max_secure_distance(replace(base, fiber=FiberSpec(100, 0.125)), tol_km=1e-3)
        assert half == pytest.approx(2 * d, abs=0.01)

    def test_result_satisfies_threshold(self, defaults):
        d = max_secure_distance(defaults)
        assert analytic_qber(defaults, d) <= 0.10 < analytic_qber(defaults, d + 0.1)

    def test_insecure_at_zero(self, defaults):
        with pytest.raises(SolverError, match="insecure at zero distance"):
            max_secure_distance(defaults, qber_threshold=0.05)

    def test_noise_free_is_unbounded(self, noiseless):
        assert max_secure_distance(noiseless) == math.inf


def test_calibration_rederives_default(defaults):
    v = calibrate_intrinsic_visibility(defaults)
    assert abs(v - defaults.interferometer.intrinsic_visibility) < 0.005
    tuned = replace(defaults, interferometer=InterferometerSpec(v))
    assert analytic_visibility(tuned, 100.0) == pytest.approx(0.83, abs=1e-9)


def test_calibration_unreachable(defaults):
    with pytest.raises(SolverError):
        calibrate_intrinsic_visibility(defaults, target_visibility=0.9, distance_km=150.0)


class TestFringeScan:
    def test_noise_off(self, defaults):
        scan = fringe_scan(make_noiseless(defaults, 0.87), 100.0, default_phase_grid(101))
        assert scan.visibility1 == pytest.approx(0.87, rel=1e-9)
        assert scan.visibility2 == pytest.approx(0.87, rel=1e-9)

    def test_defaults_100km(self, defaults):
        scan = fringe_scan(defaults, 100.0, default_phase_grid(101))
        assert scan.visibility1 == pytest.approx(0.83, abs=0.005)
        assert scan.visibility1 == pytest.approx(analytic_visibility(defaults, 100.0), rel=1e-9)
        assert np.argmax(scan.counts1) == 0 and np.argmax(scan.counts2) == 50

    def test_degenerate_grid(self, defaults):
        for grid in ([0.0], [1.0, 1.0], []):
            with pytest.raises(ParameterError):
                fringe_scan(defaults, 100.0, grid)
        with pytest.raises(ParameterError):
            default_phase_grid(1)

    @pytest.mark.slow
    def test_monte_carlo_matches_analytic(self, defaults):
        grid = default_phase_grid(9)
        n = 1_000_000
        cfg = defaults.at_distance(0.0)
        analytic = fringe_scan(cfg, 0.0, grid)
        mc = fringe_scan(cfg, 0.0, grid, n)
        for a, m in zip(analytic.counts1 + analytic.counts2, mc.counts1 + mc.counts2):
            assert abs(m - a) < 4 * math.sqrt(a * (1 - a) / n)
        assert mc.visibility1 == pytest.approx(0.87, abs=0.01)


class TestDistanceSweep:
    def test_loss_slope(self, defaults):
        noise_free = make_noiseless(defaults, 0.87)
        pts = distance_sweep(noise_free, np.arange(0, 101, 5.0))
        d = np.array([p.distance_km for p in pts])
        y = np.log10([p.analytic_raw_prob for p in pts])
        slope, intercept = np.polyfit(d, y, 1)
        r2 = 1 - np.sum((y - (slope * d + intercept)) ** 2) / np.sum((y - y.mean()) ** 2)
        assert slope == pytest.approx(-0.025, abs=1e-4)
        assert r2 > 0.999

    def test_floor_columns(self, defaults):
        pts = distance_sweep(defaults, [0, 20, 40, 60, 100])
        assert all(p.dark_floor == 2e-7 for p in pts)
        assert [p.stray_floor for p in pts[2:]] == [pytest.approx(1.2e-6, rel=1e-12)] * 3
        assert pts[0].stray_floor == 0.0
        assert all(p.mc_raw_prob is None and p.mc_qber is None for p in pts)

    def test_monte_carlo_columns(self, defaults):
        pts = distance_sweep(defaults, [0.0, 10.0], n_pulses=200_000)
        for p in pts:
            assert abs(p.mc_raw_prob - p.analytic_raw_prob) < 4 * math.sqrt(p.analytic_raw_prob / 200_000)
            assert p.mc_qber is not None

    def test_validation(self, defaults):
        with pytest.raises(ParameterError):
            distance_sweep(defaults, [])
        with pytest.raises(ParameterError):
            distance_sweep(defaults, [-5.0])


class TestImprovement:
    def test_defaults(self, defaults):
        gain, usable = improvement_equivalent_db(defaults)
        assert gain == pytest.approx(17.0, abs=1e-9)
        assert 6.0 <= usable <= 12.0

    def test_dark_limited(self, defaults):
        base = defaults.without_stray()
        gain, usable = improvement_equivalent_db(base)
        assert abs(usable - gain) < 1.0
        # oracle: direct secure-distance difference at both dark levels
        dark = replace(base.detector1, dark_count_prob_per_gate=2e-7 * 10 ** 1.7)
        conv = replace(base, detector1=dark, detector2=dark)
        diff_db = 0.25 * (max_secure_distance(base) - max_secure_distance(conv))
        assert usable == pytest.approx(diff_db, abs=1e-9)
