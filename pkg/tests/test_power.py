import math

import numpy as np
import pytest

from galt.errors import ConfigError
from galt.power import (PowerParams, array_temperature, clamp_radius_au,
                        effective_power, max_thrust, preset, thrust_ceiling)

PP = PowerParams()


def test_array_temperature_at_one_au():
    t, clamped = array_temperature(1.0, 0.0, PP)
    assert abs(t - 369.0) < 2.0
    assert not clamped


def test_edge_on_array_is_cold():
    t, _ = array_temperature(1.0, math.pi / 2, PP)
    assert t == 0.0


def test_temperature_distance_scaling():
    # T ~ R^(-1/2); compare two radii where neither value hits the clamp
    t1, _ = array_temperature(2.0, 0.0, PP)
    t2, _ = array_temperature(1.0, 0.0, PP)
    assert abs(t2 / t1 - math.sqrt(2.0)) < 1e-12


def test_temperature_clamp_close_to_sun():
    t, clamped = array_temperature(0.3, 0.0, PP)
    assert clamped and t == PP.t_max_array


def test_power_chain_at_one_au():
    p_in, clamped = effective_power(1.0, 0.0, PP, smooth=False)
    assert abs(p_in - 10630.0) < 50.0
    assert not clamped


def test_power_clamped_at_mercury():
    p_in, clamped = effective_power(0.39, 0.0, PP, smooth=False)
    assert clamped and p_in == PP.p_max


def test_power_floor_zero():
    pp = PowerParams(p_ss=30000.0)  # housekeeping exceeds production
    p_in, _ = effective_power(1.0, 0.0, pp, smooth=False)
    assert p_in == 0.0


def test_max_thrust_linear():
    assert max_thrust(0.0, PP) == 0.0
    f1 = max_thrust(5000.0, PP)
    f2 = max_thrust(10000.0, PP)
    assert abs(f2 - 2 * f1) < 1e-12


def test_default_fsp_calibration():
    # ceiling 0.6 N at the 15 kW PPU limit with 0.9 engine efficiency
    assert abs(max_thrust(PP.p_max, PP) - 0.6) < 1e-3


def test_clamp_radius_location():
    r = clamp_radius_au(PP)
    assert 0.80 <= r <= 0.90


def test_thrust_ceiling_monotone_and_flat_inside_clamp():
    r_clamp = clamp_radius_au(PP)
    f_in, _ = thrust_ceiling(r_clamp * 0.6, PP, smooth=False)
    f_at, _ = thrust_ceiling(r_clamp * 0.999, PP, smooth=False)
    assert abs(f_in - f_at) < 1e-12
    radii = np.linspace(r_clamp + 0.02, 2.0, 40)
    vals = [thrust_ceiling(r, PP, smooth=False)[0] for r in radii]
    assert all(vals[i] >= vals[i + 1] for i in range(len(vals) - 1))


def test_thrust_ceiling_derivative_matches_fd():
    r_clamp = clamp_radius_au(PP)
    h = 1e-7
    for r in (0.5, r_clamp - 0.05, r_clamp + 0.05, 1.0, 1.4, 2.2):
        f, df = thrust_ceiling(r, PP, smooth=True)
        fp, _ = thrust_ceiling(r + h, PP, smooth=True)
        fm, _ = thrust_ceiling(r - h, PP, smooth=True)
        fd = (fp - fm) / (2 * h)
        assert abs(df - fd) < 1e-6 * max(1.0, abs(fd))


def test_softmin_close_to_hard_min_away_from_clamp():
    for r in (0.5, 1.0, 1.5):
        f_soft, _ = thrust_ceiling(r, PP, smooth=True)
        f_hard, _ = thrust_ceiling(r, PP, smooth=False)
        assert abs(f_soft - f_hard) < 0.02 * max(f_hard, 1e-6)


def test_preset_lookup():
    pp = preset("bepi-ref")
    assert pp.p_1au == 11200.0
    pp2 = preset("bepi-ref", f_sp=2.5e-5)
    assert pp2.f_sp == 2.5e-5
    with pytest.raises(ConfigError):
        preset("nonexistent")


def test_invalid_params_rejected():
    with pytest.raises(ConfigError):
        PowerParams(eta_engine=0.0)
    with pytest.raises(ConfigError):
        PowerParams(absorptivity=1.2)
