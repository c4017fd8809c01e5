"""Physical constants and canonical unit values.

Distances in km, times in s, masses in kg unless suffixed otherwise.
"""

import math

AU_KM = 1.495978707e8          # astronomical unit
DAY_S = 86400.0                # one day
JULIAN_CENTURY_DAYS = 36525.0

MU_SUN = 1.32712440018e11      # km^3/s^2
G0 = 9.80665                   # m/s^2, standard gravity
SOLAR_CONSTANT = 1367.0        # W/m^2 at 1 AU
STEFAN_BOLTZMANN = 5.670374419e-8  # W m^-2 K^-4

# Heliocentric canonical time unit: mu_sun == 1 in (AU, TU) units.
TU_S = math.sqrt(AU_KM**3 / MU_SUN)   # ~5.0227e6 s ~ 58.13 d
TU_DAYS = TU_S / DAY_S
SPEED_KMS = AU_KM / TU_S               # ~29.785 km/s, 1 AU/TU
