"""Nondimensional unit system used by the transcription and solver.

Length in AU, time such that the solar gravitational parameter equals one,
mass referenced to the spacecraft wet mass.  Derived scales follow from
these three.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constants import AU_KM, MU_SUN, TU_S


@dataclass(frozen=True)
class Scaling:
    """Reference quantities for nondimensionalization.

    Attributes
    ----------
    length_km : float
        Reference length (default 1 AU).
    time_s : float
        Reference time; default makes the heliocentric mu equal 1.
    mass_kg : float
        Reference mass, normally the initial wet mass.
    """

    length_km: float = AU_KM
    time_s: float = TU_S
    mass_kg: float = 1.0

    @property
    def speed_kms(self) -> float:
        return self.length_km / self.time_s

    @property
    def accel_kms2(self) -> float:
        return self.length_km / self.time_s**2

    @property
    def force_n(self) -> float:
        # kg * km/s^2 * 1000 = N
        return self.mass_kg * self.accel_kms2 * 1e3

    @property
    def power_w(self) -> float:
        return self.force_n * self.speed_kms * 1e3

    @property
    def mu_sun_nd(self) -> float:
        return MU_SUN * self.time_s**2 / self.length_km**3

    # -- scalar/vector converters (work on floats and arrays) --

    def nd_length(self, km):
        return km / self.length_km

    def dim_length(self, x):
        return x * self.length_km

    def nd_time(self, s):
        return s / self.time_s

    def dim_time(self, t):
        return t * self.time_s

    def nd_speed(self, kms):
        return kms / self.speed_kms

    def dim_speed(self, v):
        return v * self.speed_kms

    def nd_mass(self, kg):
        return kg / self.mass_kg

    def dim_mass(self, m):
        return m * self.mass_kg

    def nd_force(self, newton):
        return newton / self.force_n

    def dim_force(self, f):
        return f * self.force_n

    def nd_mu(self, mu_km3_s2):
        return mu_km3_s2 * self.time_s**2 / self.length_km**3
