"""Cartesian state and classical orbital element containers.

All Cartesian states are dimensional (km, km/s, kg) and carry a frame tag:
``"heliocentric"`` for the Sun-centered ecliptic-J2000 frame, or
``"planetocentric:<body>"`` for a frame with axes parallel to the
heliocentric one but origin translated to a planet.  Mixed-frame operations
raise :class:`~galt.errors.FrameError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .epoch import Epoch
from .errors import FrameError

HELIOCENTRIC = "heliocentric"


def planetocentric(body_name: str) -> str:
    return f"planetocentric:{body_name.lower()}"


@dataclass
class StateVector:
    """Position/velocity/propellant-mass snapshot at an epoch."""

    r: np.ndarray            # km
    v: np.ndarray            # km/s
    epoch: Epoch
    m_p: float = 0.0         # propellant mass, kg
    frame: str = HELIOCENTRIC

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.r.shape != (3,) or self.v.shape != (3,):
            raise ValueError("r and v must be 3-vectors")
        if np.linalg.norm(self.r) == 0.0:
            raise ValueError("position vector must be nonzero")
        if self.m_p < 0.0:
            raise ValueError(f"propellant mass must be >= 0, got {self.m_p}")

    @property
    def r_mag(self) -> float:
        return float(np.linalg.norm(self.r))

    @property
    def v_mag(self) -> float:
        return float(np.linalg.norm(self.v))

    def require_frame(self, frame: str):
        if self.frame != frame:
            raise FrameError(f"expected frame {frame!r}, got {self.frame!r}")

    def copy(self) -> "StateVector":
        return StateVector(self.r.copy(), self.v.copy(), self.epoch, self.m_p, self.frame)


@dataclass
class OrbitalElements:
    """Classical elements; hyperbolae use a < 0 and e > 1.

    Angles in radians.  For zero inclination the node is undefined and the
    convention is raan = 0 with argp measured from the x-axis.
    """

    a: float        # semimajor axis, km (negative for hyperbolae)
    e: float
    i: float        # rad, [0, pi]
    raan: float     # rad
    argp: float     # rad
    nu: float       # rad, true anomaly
    mu: float       # km^3/s^2 of the central body

    def __post_init__(self):
        if self.e < 0:
            raise ValueError(f"eccentricity must be >= 0, got {self.e}")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not (0.0 <= self.i <= np.pi + 1e-12):
            raise ValueError(f"inclination must lie in [0, pi], got {self.i}")
        if self.e > 1.0 and self.a >= 0.0:
            raise ValueError("hyperbola requires a < 0")
        if self.e < 1.0 and self.a <= 0.0:
            raise ValueError("ellipse requires a > 0")

    @property
    def p(self) -> float:
        """Semi-latus rectum, km."""
        return self.a * (1.0 - self.e**2)

    @property
    def periapsis_radius(self) -> float:
        return self.a * (1.0 - self.e)
