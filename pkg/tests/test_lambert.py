import math

import numpy as np
import pytest

from galt.bodies import ephemeris_state, get_body
from galt.constants import DAY_S, MU_SUN
from galt.epoch import Epoch
from galt.errors import ConvergenceError
from galt.kepler import kepler_propagate
from galt.lambert import lambert
from galt.states import StateVector


def test_quarter_circle_is_circular_velocity():
    r1 = np.array([1.0, 0.0, 0.0])
    r2 = np.array([0.0, 1.0, 0.0])
    v1, v2 = lambert(r1, r2, math.pi / 2, 1.0)
    assert np.allclose(v1, [0.0, 1.0, 0.0], atol=1e-9)
    assert np.allclose(v2, [-1.0, 0.0, 0.0], atol=1e-9)


def test_earth_venus_closure():
    earth = get_body("earth")
    venus = get_body("venus")
    t0 = Epoch(3862.5)
    tof_d = 150.0
    s_e = ephemeris_state(earth, t0)
    s_v = ephemeris_state(venus, t0 + tof_d)
    v1, v2 = lambert(s_e.r, s_v.r, tof_d * DAY_S, MU_SUN)
    prop = kepler_propagate(StateVector(s_e.r, v1, t0), tof_d * DAY_S, MU_SUN)
    assert np.linalg.norm(prop.r - s_v.r) / np.linalg.norm(s_v.r) < 1e-8
    assert np.linalg.norm(prop.v - v2) < 1e-8 * np.linalg.norm(v2)


def test_direction_flag_mirrors_out_of_plane():
    r1 = np.array([1.0, 0.0, 0.0])
    r2 = np.array([0.2, 0.9, 0.1])
    v1p, _ = lambert(r1, r2, 1.8, 1.0, direction="prograde")
    v1r, _ = lambert(r1, r2, 1.8, 1.0, direction="retrograde")
    # both reach r2; the out-of-plane component flips sense
    assert v1p[2] * v1r[2] < 0.0


def test_closure_property_random_well_conditioned():
    rng = np.random.default_rng(77)
    count = 0
    worst = 0.0
    while count < 1000:
        r1 = rng.normal(size=3)
        r1 *= (0.7 + rng.random()) / np.linalg.norm(r1)
        r2 = rng.normal(size=3)
        r2 *= (0.7 + rng.random()) / np.linalg.norm(r2)
        ang = math.acos(np.clip(np.dot(r1, r2) / (np.linalg.norm(r1) * np.linalg.norm(r2)), -1, 1))
        if ang < 0.3 or ang > math.pi - 0.3:
            continue
        tof = 0.3 + 2.5 * rng.random()
        v1, v2 = lambert(r1, r2, tof, 1.0)
        prop = kepler_propagate(StateVector(r1, v1, Epoch(0.0)), tof, 1.0)
        err = (np.linalg.norm(prop.r - r2) + np.linalg.norm(prop.v - v2))
        worst = max(worst, err)
        count += 1
    assert worst < 1e-8


def test_degenerate_angles_rejected():
    r1 = np.array([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        lambert(r1, 1.0000001 * r1, 1.0, 1.0)
    with pytest.raises(ValueError):
        lambert(r1, -1.0000001 * r1, 1.0, 1.0)


def test_nonpositive_tof_rejected():
    with pytest.raises(ValueError):
        lambert([1, 0, 0], [0, 1, 0], 0.0, 1.0)


def test_long_tof_high_ellipse_still_closes():
    # very long transfers ride the near-one-revolution ellipse branch
    r1 = np.array([1.0, 0.0, 0.0])
    r2 = np.array([0.0, 1.0, 0.0])
    tof = 300.0
    v1, v2 = lambert(r1, r2, tof, 1.0)
    prop = kepler_propagate(StateVector(r1, v1, Epoch(0.0)), tof, 1.0)
    assert np.linalg.norm(prop.r - r2) < 1e-6
