"""Gravity-assist models: instantaneous link-conic and propagated hyperbola.

The link-conic model treats the sphere of influence as a point: position is
unchanged, planet-relative speed is conserved and the velocity turns by
180 deg - 2 beta, with beta fixed by the pericenter radius.  The full model
parameterizes each flyby by the five orbital elements of the planetocentric
hyperbola plus the pericenter epoch, reconstructs the pericenter state,
and integrates it backward and forward to the sphere of influence under
planet gravity plus the differential solar term.  Matching the integrated
endpoints to the heliocentric arcs closes the trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bodies import BodyModel, ephemeris_state
from .constants import DAY_S, MU_SUN
from .dynamics import planetocentric_rhs
from .epoch import Epoch
from .errors import IntegrationError
from .kepler import elements_to_state, hyperbolic_tof
from .scaling import Scaling
from .states import OrbitalElements, StateVector, planetocentric


@dataclass
class LinkConicEvent:
    """One instantaneous swing-by: junction data for the zero-SOI model.

    ``r`` is the heliocentric junction position; it defaults to the planet
    position (the model's own consistency condition).
    """

    body: BodyModel
    t_ga: Epoch
    r_p: float                    # pericenter radius, km (optimization parameter)
    v_in: np.ndarray              # heliocentric velocity before the flyby, km/s
    v_out: np.ndarray             # heliocentric velocity after the flyby, km/s
    r: np.ndarray | None = None   # heliocentric junction position, km


@dataclass
class SwingbyHyperbola:
    """Planetocentric flyby hyperbola, parameterized for the optimizer."""

    body: BodyModel
    a: float                      # km, negative
    e: float                      # > 1
    i: float                      # rad
    raan: float                   # rad
    argp: float                   # rad
    t_p: Epoch                    # pericenter passage epoch

    def __post_init__(self):
        if not (self.e > 1.0 and self.a < 0.0):
            raise ValueError(f"hyperbola needs e > 1, a < 0; got e={self.e}, a={self.a}")

    @property
    def pericenter_radius(self) -> float:
        return self.a * (1.0 - self.e)

    def half_transit_s(self) -> float:
        """Unperturbed pericenter-to-SOI transit time, seconds."""
        return hyperbolic_tof(self.a, self.e, self.body.soi_radius, self.body.mu)

    def vinf(self) -> float:
        """Asymptotic speed sqrt(mu/|a|), km/s."""
        return math.sqrt(self.body.mu / -self.a)


def turn_half_angle(mu: float, v_rel: float, r_p: float) -> float:
    """Complementary half rotation angle beta = acos(mu/(v^2 r_p + mu))."""
    return math.acos(mu / (v_rel**2 * r_p + mu))


def linkconic_residuals(ev: LinkConicEvent, planet_state: StateVector) -> np.ndarray:
    """Seven-component residual of the instantaneous swing-by conditions.

    Rows: junction position minus planet position (3), relative speed
    difference (1), velocity rotation condition (1), and two slots reserved
    for altitude-bound bookkeeping (always zero here; the bound lives on
    the pericenter-radius parameter).  All rows vanish at a consistent
    swing-by.
    """
    out = np.zeros(7)
    r_junction = ev.r if ev.r is not None else planet_state.r
    out[0:3] = r_junction - planet_state.r
    v_rel_in = np.asarray(ev.v_in, float) - planet_state.v
    v_rel_out = np.asarray(ev.v_out, float) - planet_state.v
    si = np.linalg.norm(v_rel_in)
    so = np.linalg.norm(v_rel_out)
    out[3] = so - si
    beta = turn_half_angle(ev.body.mu, si, ev.r_p)
    out[4] = float(np.dot(v_rel_out, v_rel_in)) + math.cos(2.0 * beta) * si**2
    return out


def hyperbola_from_velocities(v_rel_in, v_rel_out, r_p: float,
                              body: BodyModel, t_p: Epoch) -> SwingbyHyperbola:
    """First-guess hyperbola elements from planet-relative velocities.

    The semimajor axis and eccentricity follow from the incoming speed and
    the pericenter radius; the orbit plane from the two velocity vectors;
    the apsidal direction from the bisection property of the asymptotes.
    The two velocities must be linearly independent; magnitudes may differ
    slightly (first-guess context), in which case the returned elements
    reproduce the asymptote directions only approximately.
    """
    vi = np.asarray(v_rel_in, dtype=float)
    vo = np.asarray(v_rel_out, dtype=float)
    mu = body.mu
    si = np.linalg.norm(vi)
    a = -mu / si**2
    e = 1.0 - r_p / a
    h = np.cross(vi, vo)
    hn = np.linalg.norm(h)
    if hn < 1e-12 * si * np.linalg.norm(vo):
        raise ValueError("velocities are collinear; flyby plane undefined")
    h_hat = h / hn
    inc = math.acos(max(-1.0, min(1.0, h_hat[2])))
    raan = math.atan2(h_hat[0], -h_hat[1])
    node = np.array([-h_hat[1], h_hat[0], 0.0])
    nn = np.linalg.norm(node)
    n_hat = node / nn if nn > 1e-14 else np.array([1.0, 0.0, 0.0])

    beta = turn_half_angle(mu, si, r_p)
    # apsidal unit vector: in-plane, bisecting the incoming direction and the
    # reversed outgoing direction
    M = np.vstack((h_hat, vi / si, vo / np.linalg.norm(vo)))
    rhs = np.array([0.0, math.cos(beta), -math.cos(beta)])
    try:
        b = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate flyby geometry: apsidal system is singular") from exc
    b /= np.linalg.norm(b)
    m_hat = np.cross(h_hat, n_hat)
    argp = math.atan2(float(np.dot(b, m_hat)), float(np.dot(b, n_hat))) % (2.0 * math.pi)
    return SwingbyHyperbola(body=body, a=a, e=e, i=inc, raan=raan, argp=argp, t_p=t_p)


def pericenter_state(hy: SwingbyHyperbola) -> StateVector:
    """Planetocentric state at the hyperbola pericenter."""
    el = OrbitalElements(a=hy.a, e=hy.e, i=hy.i, raan=hy.raan, argp=hy.argp,
                         nu=0.0, mu=hy.body.mu)
    return elements_to_state(el, epoch=hy.t_p, frame=planetocentric(hy.body.name))


def propagate_hyperbola(hy: SwingbyHyperbola, include_sun: bool = True,
                        rtol: float = 1e-11, min_altitude_km: float = 0.0):
    """Integrate the flyby from pericenter to both SOI crossings.

    The transit duration comes from the unperturbed hyperbola; the solar
    term shifts the endpoint radii slightly off the nominal sphere (well
    below a percent for the bodies handled here).

    Returns
    -------
    (state_in, state_out, dt_s) : tuple
        Planetocentric states at entry (t_p - dt) and exit (t_p + dt) of
        the sphere of influence, and the half-transit duration in seconds.

    Raises
    ------
    IntegrationError
        On integrator failure or if the trajectory dips below the body
        radius plus ``min_altitude_km``.
    """
    body = hy.body
    dt_s = hy.half_transit_s()
    x_p = pericenter_state(hy)
    y0 = np.concatenate((x_p.r, x_p.v))
    t_p_s = hy.t_p.mjd * DAY_S
    r_floor = body.radius + min_altitude_km
    if hy.pericenter_radius < r_floor:
        raise IntegrationError(
            f"flyby pericenter {hy.pericenter_radius:.1f} km below the "
            f"{body.name} radius floor {r_floor:.1f} km")

    def rhs(t_s, y):
        if include_sun:
            planet = ephemeris_state(body, Epoch(t_s / DAY_S))
            r_sun = -planet.r
            return planetocentric_rhs(y, body.mu, MU_SUN, r_sun)
        return planetocentric_rhs(y, body.mu, 0.0, np.zeros(3))

    def crash(t_s, y):
        return np.linalg.norm(y[0:3]) - r_floor
    crash.terminal = True
    crash.direction = -1

    out = []
    for sign in (-1.0, 1.0):
        sol = solve_ivp(rhs, (t_p_s, t_p_s + sign * dt_s), y0, method="DOP853",
                        rtol=rtol, atol=1e-6, events=crash, dense_output=False)
        if not sol.success:
            raise IntegrationError(f"flyby propagation failed: {sol.message}")
        if sol.t_events[0].size:
            raise IntegrationError(
                f"flyby collides with {body.name} (radius floor {r_floor} km)")
        y_end = sol.y[:, -1]
        ep = Epoch((t_p_s + sign * dt_s) / DAY_S)
        out.append(StateVector(y_end[0:3], y_end[3:6], ep, x_p.m_p,
                               planetocentric(body.name)))
    return out[0], out[1], dt_s


def soi_matching_residuals(state_in: StateVector, state_out: StateVector,
                           v_in, r_in, v_out, r_out,
                           body: BodyModel, t_p: Epoch, dt_s: float,
                           scaling: Scaling | None = None) -> np.ndarray:
    """Twelve matching residuals at the sphere of influence, nondimensional.

    The planet-relative endpoint states (from the hyperbola propagation)
    must equal the heliocentric arc endpoints minus the planet state at the
    corresponding crossing epochs: position and velocity, incoming and
    outgoing.  Residuals are scaled to heliocentric nondimensional units.
    """
    sc = scaling if scaling is not None else Scaling()
    dt_days = dt_s / DAY_S
    planet_in = ephemeris_state(body, t_p - dt_days)
    planet_out = ephemeris_state(body, t_p + dt_days)
    out = np.empty(12)
    out[0:3] = sc.nd_length(state_in.r - (np.asarray(r_in, float) - planet_in.r))
    out[3:6] = sc.nd_speed(state_in.v - (np.asarray(v_in, float) - planet_in.v))
    out[6:9] = sc.nd_length(state_out.r - (np.asarray(r_out, float) - planet_out.r))
    out[9:12] = sc.nd_speed(state_out.v - (np.asarray(v_out, float) - planet_out.v))
    return out
