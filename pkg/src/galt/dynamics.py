"""Flight dynamics right-hand sides and control-frame geometry.

Two regimes: heliocentric thrusting flight (point mass under solar gravity
plus engine thrust, with propellant mass as the seventh state) and
planetocentric coasting flight inside a sphere of influence (planet gravity
plus the differential solar term).  Both right-hand sides ship with
hand-coded Jacobians; a finite-difference cross-check lives in the tests.

The state layout everywhere is ``x = [rx, ry, rz, vx, vy, vz, m_p]`` and the
control is the thrust vector ``u = [ux, uy, uz]``.  Units are whatever the
caller supplies as long as they are mutually consistent (the transcription
works in nondimensional units, the swing-by propagation in km-s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import G0
from .errors import ConfigError

# smoothing half-width for |u| in the mass-flow term, in the caller's force
# units; keeps the derivative defined when an unbounded-thrust stage crosses
# zero thrust
MASS_FLOW_EPS = 1e-9


@dataclass(frozen=True)
class CraftParams:
    """Engine and mass properties of the spacecraft.

    ``isp`` may be a single value or a (begin-of-life, end-of-life) pair;
    the pair is interpolated linearly in the fraction of propellant
    consumed.
    """

    dry_mass: float                 # kg (or nondimensional, consistently)
    isp: float | tuple[float, float]
    t_max: float                    # thrust upper bound
    t_min: float | None = None      # defaults to 1e-4 * t_max
    g0: float = G0                  # m/s^2
    m_p0: float | None = None       # initial propellant, needed for dual isp

    def __post_init__(self):
        if self.dry_mass <= 0:
            raise ConfigError(f"dry mass must be positive, got {self.dry_mass}")
        if self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        lo = self.t_min if self.t_min is not None else 1e-4 * self.t_max
        if not (0.0 <= lo < self.t_max):
            raise ConfigError(f"need 0 <= t_min < t_max, got {lo} vs {self.t_max}")
        isp = self.isp
        vals = isp if isinstance(isp, tuple) else (isp,)
        if any(v <= 0 for v in vals):
            raise ConfigError(f"isp must be positive, got {isp}")
        if isinstance(isp, tuple) and self.m_p0 is None:
            raise ConfigError("dual-isp model needs m_p0 to track consumption")

    @property
    def thrust_lower(self) -> float:
        return self.t_min if self.t_min is not None else 1e-4 * self.t_max

    def isp_at(self, m_p: float) -> tuple[float, float]:
        """Effective Isp and its derivative d(isp)/d(m_p)."""
        if not isinstance(self.isp, tuple):
            return float(self.isp), 0.0
        bol, eol = self.isp
        consumed_frac = (self.m_p0 - m_p) / self.m_p0
        isp = bol + (eol - bol) * consumed_frac
        return isp, (bol - eol) / self.m_p0


def exhaust_velocity(cp: CraftParams, m_p: float, mass_flow_units: float):
    """Isp*g0 expressed in the caller's (length/time) units.

    ``mass_flow_units`` converts m/s to the velocity unit in use
    (1e-3 for km/s, 1/(scaling.speed_kms*1e3) for nondimensional).
    Returns (ve, d ve/d m_p).
    """
    isp, disp = cp.isp_at(m_p)
    ve = isp * cp.g0 * mass_flow_units
    return ve, disp * cp.g0 * mass_flow_units


def smooth_norm(u: np.ndarray, eps: float = MASS_FLOW_EPS):
    """sqrt(|u|^2 + eps^2) - eps and its gradient; zero at u = 0."""
    s = math.sqrt(float(np.dot(u, u)) + eps * eps)
    return s - eps, u / s


def heliocentric_rhs(x: np.ndarray, u: np.ndarray, cp: CraftParams,
                     mu: float, mass_flow_units: float) -> np.ndarray:
    """Time derivative of the heliocentric thrusting state.

    Gravity is the solar point mass; thrust acceleration is u over total
    mass; propellant flow is -|u|/(Isp g0).  Callers guarantee |r| > 0 and
    positive total mass.
    """
    r = x[0:3]
    v = x[3:6]
    m = cp.dry_mass + x[6]
    rn = np.linalg.norm(r)
    ve, _ = exhaust_velocity(cp, x[6], mass_flow_units)
    un, _ = smooth_norm(u)
    out = np.empty(7)
    out[0:3] = v
    out[3:6] = -mu / rn**3 * r + u / m
    out[6] = -un / ve
    return out


def heliocentric_jacobians(x: np.ndarray, u: np.ndarray, cp: CraftParams,
                           mu: float, mass_flow_units: float):
    """(dF/dx, dF/du) for :func:`heliocentric_rhs`; shapes (7,7) and (7,3)."""
    r = x[0:3]
    m = cp.dry_mass + x[6]
    rn = np.linalg.norm(r)
    ve, dve = exhaust_velocity(cp, x[6], mass_flow_units)
    un, dun = smooth_norm(u)

    A = np.zeros((7, 7))
    A[0:3, 3:6] = np.eye(3)
    A[3:6, 0:3] = mu * (3.0 * np.outer(r, r) / rn**5 - np.eye(3) / rn**3)
    A[3:6, 6] = -u / m**2
    A[6, 6] = un * dve / ve**2

    B = np.zeros((7, 3))
    B[3:6, :] = np.eye(3) / m
    B[6, :] = -dun / ve
    return A, B


def planetocentric_rhs(x: np.ndarray, body_mu: float, sun_mu: float,
                       r_sun: np.ndarray) -> np.ndarray:
    """Coasting flight about a planet with the differential solar term.

    Parameters
    ----------
    x : ndarray
        Six-state [r, v] relative to the planet (km, km/s); a seventh
        (mass) entry, if present, is carried with zero rate.
    body_mu, sun_mu : float
        Gravitational parameters, km^3/s^2.  ``sun_mu = 0`` reduces the
        model to pure two-body flight.
    r_sun : ndarray
        Sun position in the planetocentric frame at the current time, km.
    """
    r = x[0:3]
    rn = np.linalg.norm(r)
    acc = -body_mu / rn**3 * r
    if sun_mu != 0.0:
        d = r - r_sun        # spacecraft position relative to the Sun
        dn = np.linalg.norm(d)
        rsn = np.linalg.norm(r_sun)
        acc = acc - sun_mu * (d / dn**3 + r_sun / rsn**3)
    out = np.zeros_like(x)
    out[0:3] = x[3:6]
    out[3:6] = acc
    return out


def planetocentric_jacobian(x: np.ndarray, body_mu: float, sun_mu: float,
                            r_sun: np.ndarray) -> np.ndarray:
    """d(rhs)/d(state) for :func:`planetocentric_rhs` (6x6 upper block)."""
    n = x.shape[0]
    r = x[0:3]
    rn = np.linalg.norm(r)
    A = np.zeros((n, n))
    A[0:3, 3:6] = np.eye(3)
    G = body_mu * (3.0 * np.outer(r, r) / rn**5 - np.eye(3) / rn**3)
    if sun_mu != 0.0:
        d = r - r_sun
        dn = np.linalg.norm(d)
        G = G + sun_mu * (3.0 * np.outer(d, d) / dn**5 - np.eye(3) / dn**3)
    A[3:6, 0:3] = G
    return A


def control_frame(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthonormal triad (t_hat, n_hat, h_hat) tied to the velocity.

    t_hat is along the velocity, h_hat along the orbit normal r x v, and
    n_hat = h_hat x t_hat completes the right-handed set in the tangent
    plane.  Rows of the returned 3x3 matrix are the axes.

    Raises
    ------
    ValueError
        For zero velocity or radial motion (undefined orbit normal).
    """
    v_mag = np.linalg.norm(v)
    if v_mag < 1e-14:
        raise ValueError("control frame undefined for zero velocity")
    h = np.cross(r, v)
    h_mag = np.linalg.norm(h)
    if h_mag < 1e-12 * np.linalg.norm(r) * v_mag:
        raise ValueError("control frame undefined for radial motion")
    t_hat = v / v_mag
    h_hat = h / h_mag
    n_hat = np.cross(h_hat, t_hat)
    return np.vstack((t_hat, n_hat, h_hat))


def vector_to_angles(u: np.ndarray, frame: np.ndarray):
    """(azimuth, elevation, magnitude) of a thrust vector in a local triad.

    Elevation is the angle from the tangential plane spanned by the
    velocity and orbit-normal axes; azimuth is measured in that plane from
    the velocity axis toward the in-plane normal.
    """
    u_loc = frame @ u
    mag = float(np.linalg.norm(u))
    if mag < 1e-300:
        return 0.0, 0.0, 0.0
    elev = math.asin(max(-1.0, min(1.0, u_loc[1] / mag)))
    azim = math.atan2(u_loc[2], u_loc[0])
    return azim, elev, mag


def angles_to_vector(azimuth: float, elevation: float, magnitude: float,
                     frame: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vector_to_angles`."""
    u_loc = magnitude * np.array([
        math.cos(elevation) * math.cos(azimuth),
        math.sin(elevation),
        math.cos(elevation) * math.sin(azimuth),
    ])
    return frame.T @ u_loc


def thrust_magnitude_constraint(u: np.ndarray, cp: CraftParams) -> np.ndarray:
    """Inequality residuals (|u| - t_min, t_max - |u|); >= 0 when feasible."""
    un = float(np.linalg.norm(u))
    return np.array([un - cp.thrust_lower, cp.t_max - un])
