"""Low-thrust interplanetary trajectory optimization with gravity assists.

The toolkit transcribes multiphase low-thrust trajectories with finite
elements in time into a sparse nonlinear program, models gravity assists
either as instantaneous velocity rotations or as propagated planetocentric
hyperbolae matched at the sphere of influence, solves the program with a
built-in SQP method, and verifies solutions by independent forward
propagation.
"""

__version__ = "0.1.0"

from .bodies import BodyModel, default_catalog, ephemeris_state, get_body, load_catalog, soi_radius
from .constants import AU_KM, DAY_S, G0, MU_SUN, TU_S
from .dynamics import (CraftParams, angles_to_vector, control_frame,
                       heliocentric_rhs, planetocentric_rhs,
                       thrust_magnitude_constraint, vector_to_angles)
from .epoch import Epoch
from .errors import (ConfigError, ConvergenceError, EphemerisRangeError,
                     EvaluationError, FrameError, GaltError,
                     InfeasibleArrivalError, IntegrationError)
from .kepler import elements_to_state, hyperbolic_tof, kepler_propagate, state_to_elements
from .lambert import lambert
from .power import PowerParams, array_temperature, effective_power, max_thrust, preset, thrust_ceiling
from .quadrature import LagrangeBasis, gauss_points
from .scaling import Scaling
from .states import HELIOCENTRIC, OrbitalElements, StateVector, planetocentric
from .swingby import (LinkConicEvent, SwingbyHyperbola, hyperbola_from_velocities,
                      linkconic_residuals, propagate_hyperbola, soi_matching_residuals,
                      turn_half_angle)
