"""Planetary body models and analytic mean-element ephemerides.

The shipped catalog carries heliocentric ecliptic mean elements at J2000
with linear secular rates per Julian century for Mercury through Mars.
Positions follow from the propagated mean elements through Kepler's
equation; velocities come from the osculating elements, so they are
consistent with the positions to second order in the rates.

The catalog is a plain-text table; an alternative file can be supplied
explicitly or through the ``GALT_BODY_CATALOG`` environment variable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constants import AU_KM, MU_SUN
from .epoch import Epoch
from .errors import ConfigError
from .states import HELIOCENTRIC, StateVector

_CATALOG_ENV = "GALT_BODY_CATALOG"


@dataclass(frozen=True)
class MeanElements:
    """Mean elements at J2000 plus secular rates (per Julian century)."""

    a_au: float
    a_dot: float
    e: float
    e_dot: float
    i_deg: float
    i_dot: float
    L_deg: float
    L_dot: float
    varpi_deg: float      # longitude of perihelion
    varpi_dot: float
    raan_deg: float
    raan_dot: float


@dataclass(frozen=True)
class BodyModel:
    """A gravitating body: physical constants plus its heliocentric orbit."""

    name: str
    mu: float              # km^3/s^2
    radius: float          # km
    elements: MeanElements | None
    soi_radius: float = 0.0  # km; 0 for the central body

    def mean_semimajor_axis_km(self) -> float:
        if self.elements is None:
            raise ConfigError(f"{self.name} has no orbital elements")
        return self.elements.a_au * AU_KM


def soi_radius(body_mu: float, sun_mu: float, body_orbit_a_km: float) -> float:
    """Laplace sphere-of-influence radius r = a (mu_P/mu_S)^(2/5), km."""
    if body_mu < 0 or sun_mu <= 0 or body_orbit_a_km <= 0:
        raise ValueError("soi_radius needs nonnegative mu and positive a")
    return body_orbit_a_km * (body_mu / sun_mu) ** 0.4


def _parse_row(tokens):
    name = tokens[0].lower()
    mu = float(tokens[1])
    radius = float(tokens[2])
    if tokens[3] == "-":
        return BodyModel(name, mu, radius, None)
    vals = [float(t) for t in tokens[3:17]]
    el = MeanElements(*vals)
    soi = soi_radius(mu, MU_SUN, el.a_au * AU_KM)
    return BodyModel(name, mu, radius, el, soi)


def load_catalog(path: str | None = None) -> dict[str, BodyModel]:
    """Load the body catalog; shipped defaults unless a path is given."""
    if path is None:
        path = os.environ.get(_CATALOG_ENV)
    if path is None:
        text = resources.files("galt.data").joinpath("bodies.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    catalog = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 3:
            raise ConfigError(f"malformed catalog row: {line!r}")
        body = _parse_row(tokens)
        catalog[body.name] = body
    if "sun" not in catalog:
        raise ConfigError("catalog must include the sun")
    return catalog


_DEFAULT_CATALOG: dict[str, BodyModel] | None = None


def default_catalog() -> dict[str, BodyModel]:
    global _DEFAULT_CATALOG
    if _DEFAULT_CATALOG is None:
        _DEFAULT_CATALOG = load_catalog()
    return _DEFAULT_CATALOG


def get_body(name: str, catalog: dict[str, BodyModel] | None = None) -> BodyModel:
    cat = catalog if catalog is not None else default_catalog()
    key = name.lower()
    if key not in cat:
        raise ConfigError(f"unknown body {name!r}; catalog has {sorted(cat)}")
    return cat[key]


def _solve_kepler_elliptic(M: float, e: float) -> float:
    """Eccentric anomaly from mean anomaly, Newton on Kepler's equation."""
    M = math.remainder(M, 2.0 * math.pi)
    E = M + e * math.sin(M)
    for _ in range(50):
        f = E - e * math.sin(E) - M
        E_new = E - f / (1.0 - e * math.cos(E))
        if abs(E_new - E) < 1e-14:
            return E_new
        E = E_new
    return E


def _mean_position(body: BodyModel, mjd: float) -> np.ndarray:
    """Heliocentric position (km) from the propagated mean elements."""
    el = body.elements
    T = mjd / 36525.0
    a = (el.a_au + el.a_dot * T) * AU_KM
    e = el.e + el.e_dot * T
    inc = math.radians(el.i_deg + el.i_dot * T)
    L = math.radians(el.L_deg + el.L_dot * T)
    varpi = math.radians(el.varpi_deg + el.varpi_dot * T)
    raan = math.radians(el.raan_deg + el.raan_dot * T)
    argp = varpi - raan
    M = L - varpi
    E = _solve_kepler_elliptic(M, e)

    cE, sE = math.cos(E), math.sin(E)
    x_p = a * (cE - e)
    y_p = a * math.sqrt(1.0 - e * e) * sE

    cO, sO = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    cw, sw = math.cos(argp), math.sin(argp)
    R = np.array([
        [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
        [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
        [sw * si, cw * si, ci],
    ])
    return R @ np.array([x_p, y_p, 0.0])


# half-width of the central difference used for ephemeris velocities, s
_VEL_FD_S = 30.0


def ephemeris_state(body: BodyModel, t: Epoch) -> StateVector:
    """Heliocentric position/velocity of a catalog body at an epoch.

    The velocity is the exact time derivative of the mean-element position
    (central difference over a minute), so it carries the secular drift
    terms and stays consistent with finite differences of the position to
    second order in the rates.

    Parameters
    ----------
    body : BodyModel
        Must carry mean elements (i.e. not the Sun).
    t : Epoch
        Within +/- 2 centuries of J2000.

    Returns
    -------
    StateVector
        km and km/s in the heliocentric frame; m_p is zero.
    """
    t.check_ephemeris_range()
    if body.elements is None:
        raise ConfigError(f"{body.name} has no orbit to evaluate")
    r = _mean_position(body, t.mjd)
    h_days = _VEL_FD_S / 86400.0
    v = (_mean_position(body, t.mjd + h_days)
         - _mean_position(body, t.mjd - h_days)) / (2.0 * _VEL_FD_S)
    return StateVector(r, v, t, 0.0, HELIOCENTRIC)


def ephemeris_velocity_rate(body: BodyModel, t: Epoch) -> np.ndarray:
    """Acceleration of the body (two-body estimate), km/s^2.

    Used for analytic derivatives of constraints that contain planet
    states at optimization-dependent epochs.
    """
    s = ephemeris_state(body, t)
    r = s.r
    return -MU_SUN * r / np.linalg.norm(r) ** 3
