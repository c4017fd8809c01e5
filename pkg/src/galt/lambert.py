"""Zero-revolution Lambert solver, universal-variable formulation.

Bisection on the universal parameter psi keeps the solver robust across
elliptic and strongly hyperbolic transfers.  Time of flight is monotone in
psi on the zero-revolution branch, so the root is bracketed adaptively
(down into the hyperbolic range, up to the one-revolution boundary) and
then bisected to machine precision.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError
from .kepler import stumpff_c2, stumpff_c3

PROGRADE = "prograde"
RETROGRADE = "retrograde"

_PSI_ONE_REV = 4.0 * math.pi**2


def lambert(r1, r2, tof_s: float, mu: float, direction: str = PROGRADE,
            max_iter: int = 300, tol: float = 1e-10):
    """Velocities of the conic joining ``r1`` to ``r2`` in ``tof_s`` seconds.

    Parameters
    ----------
    r1, r2 : array_like
        Position vectors, km.
    tof_s : float
        Transfer time, seconds; must be positive.
    mu : float
        Gravitational parameter of the central body, km^3/s^2.
    direction : str
        ``"prograde"`` or ``"retrograde"`` transfer sense about +z.

    Returns
    -------
    (v1, v2) : tuple of ndarray
        Departure and arrival velocity vectors, km/s.

    Raises
    ------
    ValueError
        Degenerate geometry (transfer angle near 0 or pi) or tof <= 0.
    ConvergenceError
        Bracketing or bisection failure.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if tof_s <= 0.0:
        raise ValueError(f"time of flight must be positive, got {tof_s}")
    r1n = float(np.linalg.norm(r1))
    r2n = float(np.linalg.norm(r2))
    cos_dnu = float(np.dot(r1, r2)) / (r1n * r2n)
    cos_dnu = max(-1.0, min(1.0, cos_dnu))
    cross_z = np.cross(r1, r2)[2]
    dnu = math.acos(cos_dnu)
    if direction == PROGRADE:
        if cross_z < 0.0:
            dnu = 2.0 * math.pi - dnu
    elif direction == RETROGRADE:
        if cross_z >= 0.0:
            dnu = 2.0 * math.pi - dnu
    else:
        raise ValueError(f"direction must be prograde or retrograde, got {direction!r}")

    sin_dnu = math.sin(dnu)
    if abs(sin_dnu) < 1e-10 or 1.0 - cos_dnu < 1e-12:
        raise ValueError("transfer angle too close to 0 or pi for a unique plane")
    A = sin_dnu * math.sqrt(r1n * r2n / (1.0 - cos_dnu))
    sqrt_mu = math.sqrt(mu)

    def tof_of(psi):
        """Time of flight at psi, or None where the formulation is invalid."""
        c2, c3 = stumpff_c2(psi), stumpff_c3(psi)
        if c2 <= 0.0:
            return None, 0.0
        y = r1n + r2n + A * (psi * c3 - 1.0) / math.sqrt(c2)
        if y < 0.0:
            return None, y
        chi = math.sqrt(y / c2)
        return (chi**3 * c3 + A * math.sqrt(y)) / sqrt_mu, y

    # upper bracket: inside the one-revolution boundary, where tof blows up;
    # retreat from the boundary until the Stumpff evaluation is clean
    psi_hi = None
    for margin in (1e-6, 1e-5, 1e-4, 1e-3):
        cand = _PSI_ONE_REV - margin
        t_hi, _ = tof_of(cand)
        if t_hi is not None and t_hi >= tof_s:
            psi_hi = cand
            break
    if psi_hi is None:
        raise ConvergenceError("requested time of flight beyond the zero-rev branch")

    # lower bracket: psi = 0 is always valid; walk down until tof < target
    # or the y >= 0 domain boundary is hit (tof -> 0 there)
    t0, _ = tof_of(0.0)
    if t0 is None:
        raise ConvergenceError("Lambert formulation invalid at psi = 0")
    if t0 <= tof_s:
        psi_lo = 0.0
    else:
        psi_lo = None
        psi_valid = 0.0
        psi = -1.0
        for _ in range(80):
            t, _ = tof_of(psi)
            if t is None:
                # y < 0: bisect the validity boundary; tof -> 0 approaching it
                inv, val = psi, psi_valid
                for _ in range(200):
                    mid = 0.5 * (inv + val)
                    tm, _ = tof_of(mid)
                    if tm is None:
                        inv = mid
                    else:
                        val = mid
                        if tm < tof_s:
                            break
                t_val, _ = tof_of(val)
                if t_val is None or t_val > tof_s:
                    raise ConvergenceError("Lambert bracketing failed at domain edge")
                psi_lo = val
                break
            if t < tof_s:
                psi_lo = psi
                break
            psi_valid = psi
            psi *= 2.0
        if psi_lo is None:
            raise ConvergenceError("Lambert lower bracket not found")

    psi, y = psi_lo, 0.0
    t_trial = 0.0
    for _ in range(max_iter):
        psi = 0.5 * (psi_lo + psi_hi)
        t_trial, y = tof_of(psi)
        if t_trial is None:
            psi_lo = psi
            continue
        if abs(t_trial - tof_s) < tol * tof_s:
            break
        if t_trial < tof_s:
            psi_lo = psi
        else:
            psi_hi = psi
        if psi_hi - psi_lo < 4.0 * np.finfo(float).eps * max(1.0, abs(psi)):
            break
    if t_trial is None or abs(t_trial - tof_s) > 1e-8 * tof_s:
        raise ConvergenceError(
            f"Lambert bisection failed: tof residual {t_trial - tof_s if t_trial else 'nan'} s")

    f = 1.0 - y / r1n
    g = A * math.sqrt(y / mu)
    gdot = 1.0 - y / r2n
    v1 = (r2 - f * r1) / g
    v2 = (gdot * r2 - r1) / g
    return v1, v2
