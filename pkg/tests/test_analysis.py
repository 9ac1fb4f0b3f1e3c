import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ris_linksim.analysis import (
    DeploymentScenario,
    array_gain_scaling,
    loglog_slope,
    path_gain_comparison,
    required_aperture,
    required_elements,
    thermal_noise_floor_dbm,
)

# hand-evaluated k_B*T*B at 290 K, 100 MHz: 1.380649e-23 * 290 * 1e8 W
KTB_DBM = 10 * math.log10(1.380649e-23 * 290 * 1e8 / 1e-3)
DECADES = np.unique(np.logspace(2, 4, 41).round().astype(int))
dist = st.floats(0.5, 1e4)


class TestRequiredElements:
    @pytest.mark.parametrize("ghz, n", [(5, 10000), (10, 20000), (20, 40000)])
    def test_nominal_table(self, ghz, n):
        assert required_elements(DeploymentScenario(200, 150, 200, ghz * 1e9), nominal_wavelength=True) == n

    def test_exact_speed_of_light(self):
        assert required_elements(DeploymentScenario(200, 150, 200, 5e9)) == 10007

    def test_half_wavelength_shortcut(self):
        s = DeploymentScenario(200, 150, 200, 7.3e9)
        lam = 299792458 / 7.3e9
        assert required_elements(s) == math.ceil(4 * 150 * 200 / (200 * lam))

    def test_aperture(self):
        s = DeploymentScenario(200, 150, 200, 5e9)
        assert required_aperture(s, True) == pytest.approx(150 * 200 * 0.06 / 200)

    def test_denser_spacing_needs_more(self):
        base = DeploymentScenario(200, 150, 200, 5e9)
        dense = DeploymentScenario(200, 150, 200, 5e9, element_spacing=0.25)
        assert required_elements(dense, True) == 4 * required_elements(base, True)

    @pytest.mark.parametrize("bad", [dict(d=0), dict(d_t=-1), dict(frequency=0), dict(element_spacing=0)])
    def test_invalid(self, bad):
        kw = dict(d=200, d_t=150, d_r=200, frequency=5e9) | bad
        with pytest.raises(ValueError):
            DeploymentScenario(**kw)

    @given(dist, dist, dist, st.floats(1e9, 5e10))
    def test_linear_in_frequency(self, d, dt, dr, f):
        n1 = required_elements(DeploymentScenario(d, dt, dr, f))
        n2 = required_elements(DeploymentScenario(d, dt, dr, 2 * f))
        assert 2 * n1 - 2 <= n2 <= 2 * n1


class TestNoiseFloor:
    def test_single_element(self):
        assert thermal_noise_floor_dbm(100e6, 290, 1) == pytest.approx(-93.98, abs=0.05)
        assert thermal_noise_floor_dbm(100e6, 290, 1) == pytest.approx(KTB_DBM, abs=1e-9)

    def test_ten_thousand_elements(self):
        assert thermal_noise_floor_dbm(100e6, 290, 10000) == pytest.approx(-54.0, abs=0.1)

    def test_after_path_loss(self):
        assert thermal_noise_floor_dbm(100e6, 290, 10000) - 30 == pytest.approx(-84.0, abs=0.1)

    @given(st.floats(1e3, 1e10), st.floats(1, 1e4), st.integers(1, 10**6))
    def test_element_scaling(self, b, t, n):
        assert thermal_noise_floor_dbm(b, t, n) == pytest.approx(
            thermal_noise_floor_dbm(b, t, 1) + 10 * math.log10(n), abs=1e-9)

    def test_invalid(self):
        with pytest.raises(ValueError):
            thermal_noise_floor_dbm(0.0)


class TestPathGain:
    def test_crossover(self):
        assert path_gain_comparison(2, 2) == (1 / 16, 1 / 16)

    def test_reference_geometry(self):
        mult, add = path_gain_comparison(150, 200)
        assert mult == pytest.approx(30000.0 ** -2)
        assert add == pytest.approx(350.0 ** -2)
        assert add / mult == pytest.approx((30000 / 350) ** 2)

    def test_near_field(self):
        assert path_gain_comparison(1, 1) == (1.0, 0.25)

    @given(dist, dist)
    def test_ratio_identity(self, dt, dr):
        mult, add = path_gain_comparison(dt, dr)
        assert add / mult == pytest.approx((dt * dr / (dt + dr)) ** 2, rel=1e-12)
        if dt * dr >= dt + dr:
            assert add >= mult * (1 - 1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            path_gain_comparison(0, 1)


class TestArrayGain:
    def test_square_law(self):
        assert loglog_slope(array_gain_scaling(DECADES, 0.0, 1e-13)) == pytest.approx(2.0, abs=0.01)

    def test_noise_dominated(self):
        assert loglog_slope(array_gain_scaling(DECADES, 1e-13, 0.0)) == pytest.approx(1.0, abs=0.01)

    def test_doubling_gives_6db(self):
        (_, a), (_, b) = array_gain_scaling([500, 1000], 0.0, 1.0)
        assert 10 * math.log10(b / a) == pytest.approx(6.02, abs=0.01)

    def test_slope_moves_monotonically_from_2_to_1(self):
        noise = np.logspace(-8, 4, 25)
        slopes = [loglog_slope(array_gain_scaling(DECADES, s, 1.0)) for s in noise]
        assert slopes[0] == pytest.approx(2.0, abs=0.01) and slopes[-1] == pytest.approx(1.0, abs=0.01)
        assert np.all(np.diff(slopes) <= 1e-12)

    @pytest.mark.parametrize("ns", [[], [10, 5], [0, 1]])
    def test_invalid_n(self, ns):
        with pytest.raises(ValueError):
            array_gain_scaling(ns, 0.0, 1.0)

    def test_invalid_noise(self):
        with pytest.raises(ValueError):
            array_gain_scaling([1, 2], 0.0, 0.0)
