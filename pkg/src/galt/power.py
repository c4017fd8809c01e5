"""Solar-array power chain and the resulting thrust ceiling.

The available engine power falls with distance from the Sun and with array
temperature; a power-processing-unit limit caps it from above.  The thrust
ceiling is linear in the delivered power.  All operations return plain
floats plus, where relevant, analytic derivatives with respect to the
Sun distance so the optimizer can use the chain inside path constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .constants import SOLAR_CONSTANT, STEFAN_BOLTZMANN
from .errors import ConfigError


@dataclass(frozen=True)
class PowerParams:
    """Solar-array / PPU characteristics.

    Defaults are the reference set used by the shipped Mercury scenarios
    (preset name ``"bepi-ref"``).
    """

    eta_engine: float = 0.9          # engine efficiency
    eta_array: float = 1.0           # residual degradation coefficient
    p_1au: float = 11200.0           # W produced at 1 AU
    c_temp: float = 3.0e-4           # 1/K, performance loss per kelvin
    t_ref: float = 290.0             # K, reference temperature
    kappa: float = 1.3               # radiating-to-collecting area ratio
    emissivity: float = 0.86         # IR emissivity
    absorptivity: float = 0.86       # solar absorptivity
    t_max_array: float = 423.0       # K, array qualification limit
    p_max: float = 15000.0           # W, PPU input ceiling
    p_ss: float = 300.0              # W, spacecraft housekeeping draw
    s_0: float = SOLAR_CONSTANT      # W/m^2
    sigma_sb: float = STEFAN_BOLTZMANN
    f_sp: float = 4.4444e-5          # N/W, specific thrust
    softmin_width_frac: float = 0.01  # softmin width as a fraction of p_max

    def __post_init__(self):
        for name in ("eta_engine", "eta_array", "p_1au", "c_temp", "t_ref",
                     "kappa", "emissivity", "absorptivity", "t_max_array",
                     "p_max", "p_ss", "s_0", "sigma_sb", "f_sp"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"power parameter {name} must be positive")
        for name in ("eta_engine", "eta_array", "emissivity", "absorptivity"):
            if getattr(self, name) > 1.0:
                raise ConfigError(f"power parameter {name} must be <= 1")


#: Named presets selectable from mission configs.
PRESETS = {"bepi-ref": PowerParams()}


def preset(name: str, **overrides) -> PowerParams:
    if name not in PRESETS:
        raise ConfigError(f"unknown power preset {name!r}; have {sorted(PRESETS)}")
    return replace(PRESETS[name], **overrides)


def array_temperature(r_sun_au: float, aspect_rad: float, pp: PowerParams):
    """Steady-state array temperature, purely radiative balance.

    Returns
    -------
    (t_kelvin, clamped) : tuple
        Temperature clamped at ``pp.t_max_array``; the flag reports whether
        the unclamped value exceeded the limit.  Face-on flux at 1 AU with
        the default constants gives about 369 K.
    """
    if r_sun_au <= 0.0:
        raise ValueError(f"Sun distance must be positive, got {r_sun_au}")
    cos_a = math.cos(aspect_rad)
    if cos_a < 1e-12:
        return 0.0, False  # edge-on array: no absorbed flux
    t4 = pp.s_0 * pp.absorptivity * cos_a / (
        r_sun_au**2 * pp.sigma_sb * pp.kappa * pp.emissivity)
    t = t4**0.25
    if t > pp.t_max_array:
        return pp.t_max_array, True
    return t, False


def effective_power(r_sun_au: float, aspect_rad: float, pp: PowerParams,
                    smooth: bool = True):
    """Engine input power after temperature losses, housekeeping and PPU cap.

    Returns
    -------
    (p_in_w, clamped) : tuple
        ``clamped`` is True when the PPU ceiling is (dominantly) active.
        With ``smooth`` the min() against the PPU limit is a softmin so the
        value is differentiable; the hard minimum is available for
        verification.
    """
    t_s, _ = array_temperature(r_sun_au, aspect_rad, pp)
    cos_a = max(0.0, math.cos(aspect_rad))
    p_eff = pp.eta_array * pp.p_1au / r_sun_au**2 * (
        1.0 - pp.c_temp * (t_s - pp.t_ref)) * cos_a
    p_star = p_eff - pp.p_ss
    if p_star < 0.0:
        return 0.0, False
    if smooth:
        p_in = _softmin(p_star, pp.p_max, pp.softmin_width_frac * pp.p_max)
    else:
        p_in = min(p_star, pp.p_max)
    return p_in, p_star > pp.p_max


def max_thrust(p_in_w: float, pp: PowerParams) -> float:
    """Thrust ceiling from delivered power: eta_e * P_in * F_sp, newtons."""
    if p_in_w < 0.0:
        raise ValueError(f"input power must be >= 0, got {p_in_w}")
    return pp.eta_engine * p_in_w * pp.f_sp


def thrust_ceiling(r_sun_au: float, pp: PowerParams, aspect_rad: float = 0.0,
                   smooth: bool = True):
    """Thrust ceiling and its derivative with respect to Sun distance.

    The derivative is analytic through the whole chain (temperature,
    distance falloff, softmin); it is what the transcription uses in the
    power-dependent thrust path constraint.
    """
    cos_a = max(0.0, math.cos(aspect_rad))
    if cos_a == 0.0:
        return 0.0, 0.0
    pp_t4 = pp.s_0 * pp.absorptivity * cos_a / (pp.sigma_sb * pp.kappa * pp.emissivity)
    t_unclamped = (pp_t4 / r_sun_au**2) ** 0.25
    if t_unclamped > pp.t_max_array:
        t_s, dt_dr = pp.t_max_array, 0.0
    else:
        t_s = t_unclamped
        dt_dr = -0.5 * t_s / r_sun_au
    base = pp.eta_array * pp.p_1au * cos_a
    fac = 1.0 - pp.c_temp * (t_s - pp.t_ref)
    p_eff = base / r_sun_au**2 * fac
    dp_eff = base * (-2.0 / r_sun_au**3 * fac + (-pp.c_temp * dt_dr) / r_sun_au**2)
    p_star = p_eff - pp.p_ss
    if p_star <= 0.0:
        return 0.0, 0.0
    if smooth:
        w = pp.softmin_width_frac * pp.p_max
        p_in, dmin = _softmin_d(p_star, pp.p_max, w)
        dp_in = dmin * dp_eff
    else:
        if p_star > pp.p_max:
            p_in, dp_in = pp.p_max, 0.0
        else:
            p_in, dp_in = p_star, dp_eff
    k = pp.eta_engine * pp.f_sp
    return k * p_in, k * dp_in


def _softmin(a: float, b: float, w: float) -> float:
    # -w * log(exp(-a/w) + exp(-b/w)), stabilized around min(a, b)
    m = min(a, b)
    return m - w * math.log(math.exp(-(a - m) / w) + math.exp(-(b - m) / w))


def _softmin_d(a: float, b: float, w: float):
    """Softmin value and its partial derivative with respect to ``a``."""
    m = min(a, b)
    ea = math.exp(-(a - m) / w)
    eb = math.exp(-(b - m) / w)
    val = m - w * math.log(ea + eb)
    return val, ea / (ea + eb)


def clamp_radius_au(pp: PowerParams, aspect_rad: float = 0.0,
                    lo: float = 0.1, hi: float = 3.0) -> float:
    """Sun distance where the raw array power first hits the PPU ceiling.

    Bisection on the hard (unsmoothed) chain; inside this radius the thrust
    ceiling is constant.
    """
    def excess(r):
        t_s, _ = array_temperature(r, aspect_rad, pp)
        cos_a = max(0.0, math.cos(aspect_rad))
        p_eff = pp.eta_array * pp.p_1au / r**2 * (
            1.0 - pp.c_temp * (t_s - pp.t_ref)) * cos_a
        return (p_eff - pp.p_ss) - pp.p_max

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo < 0.0:
        raise ValueError("power never reaches the PPU ceiling above the given lo")
    if f_hi > 0.0:
        raise ValueError("power exceeds the PPU ceiling over the whole bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)
