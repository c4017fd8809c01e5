"""Two-body machinery: universal-variable propagation and element conversions.

The universal formulation handles elliptic, parabolic and hyperbolic motion
uniformly through the Stumpff functions, so the same routine serves
heliocentric transfer arcs and planetocentric flyby hyperbolae.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError
from .states import OrbitalElements, StateVector

_TWO_PI = 2.0 * math.pi


_Z_FLOOR = -352000.0  # keeps cosh/sinh(sqrt(-z)) finite in double precision


def stumpff_c2(z: float) -> float:
    if z > 1e-8:
        sz = math.sqrt(z)
        return (1.0 - math.cos(sz)) / z
    if z < -1e-8:
        z = max(z, _Z_FLOOR)
        sz = math.sqrt(-z)
        return (math.cosh(sz) - 1.0) / (-z)
    return 0.5 - z / 24.0 + z * z / 720.0


def stumpff_c3(z: float) -> float:
    if z > 1e-8:
        sz = math.sqrt(z)
        return (sz - math.sin(sz)) / (z * sz)
    if z < -1e-8:
        z = max(z, _Z_FLOOR)
        sz = math.sqrt(-z)
        return (math.sinh(sz) - sz) / (sz * -z)
    return 1.0 / 6.0 - z / 120.0 + z * z / 5040.0


def kepler_propagate(s0: StateVector, dt_s: float, mu: float) -> StateVector:
    """Advance a two-body state by ``dt_s`` seconds.

    Universal-variable Newton iteration with a bisection safeguard; energy
    and angular momentum are conserved to roundoff.

    Raises
    ------
    ConvergenceError
        If the universal anomaly iteration does not converge.
    """
    r0 = np.asarray(s0.r, dtype=float)
    v0 = np.asarray(s0.v, dtype=float)
    if dt_s == 0.0:
        out = s0.copy()
        return out
    r0n = np.linalg.norm(r0)
    vr0 = float(np.dot(r0, v0)) / r0n
    alpha = 2.0 / r0n - float(np.dot(v0, v0)) / mu  # 1/a
    sqrt_mu = math.sqrt(mu)

    def residual(chi):
        z = alpha * chi * chi
        c2, c3 = stumpff_c2(z), stumpff_c3(z)
        F = (r0n * vr0 / sqrt_mu * chi * chi * c2
             + (1.0 - alpha * r0n) * chi**3 * c3 + r0n * chi - sqrt_mu * dt_s)
        dF = (chi * chi * c2 + r0n * vr0 / sqrt_mu * chi * (1.0 - z * c3)
              + r0n * (1.0 - z * c2))
        return F, dF

    # initial guess for universal anomaly chi
    if alpha > 1e-12:
        chi = sqrt_mu * dt_s * alpha
    else:
        chi = math.copysign(sqrt_mu * abs(dt_s) * abs(alpha) + 1e-3, dt_s)

    # keep z = alpha chi^2 inside the overflow-safe hyperbolic range
    chi_cap = math.sqrt(0.9 * -_Z_FLOOR / -alpha) if alpha < 0 else math.inf
    chi = max(-chi_cap, min(chi_cap, chi))

    # F is monotone increasing in chi (dF = radius > 0): bracket, then
    # Newton with bisection safeguard
    lo, hi = (0.0, chi) if dt_s > 0 else (chi, 0.0)
    step = max(abs(chi), 1.0)
    for _ in range(200):
        if dt_s > 0:
            if residual(hi)[0] > 0:
                break
            hi = min(hi + step, chi_cap)
        else:
            if residual(lo)[0] < 0:
                break
            lo = max(lo - step, -chi_cap)
        step *= 2.0
    else:
        raise ConvergenceError("universal Kepler iteration failed to bracket")

    chi = 0.5 * (lo + hi)
    converged = False
    width_mark = hi - lo
    for it in range(300):
        F, dF = residual(chi)
        if F > 0:
            hi = chi
        else:
            lo = chi
        if abs(dF) > 1e-300:
            chi_new = chi - F / dF
            if not (lo <= chi_new <= hi):
                chi_new = 0.5 * (lo + hi)
        else:
            chi_new = 0.5 * (lo + hi)
        # enforce geometric bracket shrink so stalled Newton steps cannot creep
        if it % 2 == 1:
            if (hi - lo) > 0.6 * width_mark:
                chi_new = 0.5 * (lo + hi)
            width_mark = hi - lo
        if (abs(chi_new - chi) < 1e-13 * max(1.0, abs(chi))
                or hi - lo < 1e-14 * max(1.0, abs(chi))):
            chi = chi_new
            converged = True
            break
        chi = chi_new
    if not converged:
        F, _ = residual(chi)
        if abs(F) > 1e-8 * max(1.0, sqrt_mu * abs(dt_s)):
            raise ConvergenceError(
                f"universal Kepler iteration failed (dt={dt_s:.3e} s, residual={F:.3e})"
            )

    z = alpha * chi * chi
    c2, c3 = stumpff_c2(z), stumpff_c3(z)
    f = 1.0 - chi * chi / r0n * c2
    g = dt_s - chi**3 / sqrt_mu * c3
    r_vec = f * r0 + g * v0
    rn = np.linalg.norm(r_vec)
    fdot = sqrt_mu / (rn * r0n) * chi * (z * c3 - 1.0)
    gdot = 1.0 - chi * chi / rn * c2
    v_vec = fdot * r0 + gdot * v0
    return StateVector(r_vec, v_vec, s0.epoch + dt_s / 86400.0, s0.m_p, s0.frame)


def elements_to_state(el: OrbitalElements, epoch=None, m_p: float = 0.0,
                      frame: str = "heliocentric") -> StateVector:
    """Cartesian state from classical elements.

    Works for ellipses and hyperbolae; for hyperbolae the true anomaly must
    stay inside the asymptote limits.
    """
    p = el.p
    if p <= 0.0:
        raise ValueError("degenerate (rectilinear) orbit: semi-latus rectum <= 0")
    if el.e > 1.0:
        nu_max = math.acos(-1.0 / el.e)
        if abs(el.nu) >= nu_max:
            raise ValueError("true anomaly beyond hyperbolic asymptote")
    cnu, snu = math.cos(el.nu), math.sin(el.nu)
    r_mag = p / (1.0 + el.e * cnu)
    r_pf = r_mag * np.array([cnu, snu, 0.0])
    v_pf = math.sqrt(el.mu / p) * np.array([-snu, el.e + cnu, 0.0])
    cO, sO = math.cos(el.raan), math.sin(el.raan)
    ci, si = math.cos(el.i), math.sin(el.i)
    cw, sw = math.cos(el.argp), math.sin(el.argp)
    R = np.array([
        [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
        [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
        [sw * si, cw * si, ci],
    ])
    from .epoch import Epoch
    ep = epoch if epoch is not None else Epoch(0.0)
    return StateVector(R @ r_pf, R @ v_pf, ep, m_p, frame)


def state_to_elements(s: StateVector, mu: float) -> OrbitalElements:
    """Classical elements from a Cartesian state.

    Conventions for degenerate geometry: equatorial orbits use raan = 0 with
    argp measured from the x-axis; circular orbits use argp = 0 with nu
    measured from the node (or x-axis if also equatorial).
    """
    r = np.asarray(s.r, dtype=float)
    v = np.asarray(s.v, dtype=float)
    r_mag = np.linalg.norm(r)
    h = np.cross(r, v)
    h_mag = np.linalg.norm(h)
    if h_mag < 1e-12 * r_mag * max(np.linalg.norm(v), 1e-12):
        raise ValueError("rectilinear orbit: angular momentum is zero")
    energy = 0.5 * float(np.dot(v, v)) - mu / r_mag
    if abs(energy) < 1e-14 * mu / r_mag:
        raise ValueError("parabolic orbit: element extraction is singular in a")
    a = -mu / (2.0 * energy)
    e_vec = np.cross(v, h) / mu - r / r_mag
    e = float(np.linalg.norm(e_vec))
    inc = math.acos(max(-1.0, min(1.0, h[2] / h_mag)))

    node = np.cross([0.0, 0.0, 1.0], h)
    n_mag = np.linalg.norm(node)
    eps_plane = 1e-11
    if n_mag > eps_plane * h_mag:
        raan = math.atan2(node[1], node[0]) % _TWO_PI
        n_hat = node / n_mag
    else:
        raan = 0.0
        n_hat = np.array([1.0, 0.0, 0.0])
    h_hat = h / h_mag
    m_hat = np.cross(h_hat, n_hat)

    eps_circ = 1e-11
    if e > eps_circ:
        e_hat = e_vec / e
        argp = math.atan2(float(np.dot(e_vec, m_hat)), float(np.dot(e_vec, n_hat))) % _TWO_PI
        nu = math.atan2(float(np.dot(r, np.cross(h_hat, e_hat))), float(np.dot(r, e_hat)))
        if e > 1.0:
            pass  # hyperbolic nu stays in (-nu_max, nu_max) by construction
        else:
            nu %= _TWO_PI
    else:
        argp = 0.0
        nu = math.atan2(float(np.dot(r, m_hat)), float(np.dot(r, n_hat))) % _TWO_PI
    return OrbitalElements(a=a, e=e, i=inc, raan=raan, argp=argp, nu=nu, mu=mu)


def hyperbolic_tof(a: float, e: float, r_target: float, mu: float) -> float:
    """Time from pericenter to radius ``r_target`` on a hyperbola, seconds.

    Uses the hyperbolic Kepler equation: cosh H = (1 - r/a)/e and
    dt = (e sinh H - H) sqrt(|a|^3 / mu).

    Raises
    ------
    ValueError
        If the orbit is not hyperbolic or the radius is below pericenter.
    """
    if not (e > 1.0 and a < 0.0):
        raise ValueError(f"hyperbola requires e > 1 and a < 0, got e={e}, a={a}")
    r_peri = a * (1.0 - e)
    if r_target < r_peri * (1.0 - 1e-12):
        raise ValueError(f"radius {r_target} below pericenter {r_peri}")
    cosh_h = (1.0 - r_target / a) / e
    if cosh_h < 1.0:
        cosh_h = 1.0
    H = math.acosh(cosh_h)
    return (e * math.sinh(H) - H) * math.sqrt(-(a**3) / mu)


def specific_energy(s: StateVector, mu: float) -> float:
    return 0.5 * s.v_mag**2 - mu / s.r_mag


def angular_momentum(s: StateVector) -> np.ndarray:
    return np.cross(s.r, s.v)
