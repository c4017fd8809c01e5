"""Gauss quadrature rules and Lagrange interpolation bases on [-1, 1].

Two node families are provided: Gauss-Legendre (interior nodes, exact for
polynomials of degree <= 2q-1) and Gauss-Lobatto (endpoints included, exact
for degree <= 2q-3).  Lagrange bases are evaluated barycentrically, which
stays well conditioned for the node counts used here.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as _leg

LEGENDRE = "legendre"
LOBATTO = "lobatto"


@lru_cache(maxsize=None)
def gauss_points(q: int, kind: str = LEGENDRE):
    """Nodes and weights of a q-point Gauss rule on [-1, 1].

    Parameters
    ----------
    q : int
        Point count; q >= 1 for Legendre, q >= 2 for Lobatto.
    kind : str
        ``"legendre"`` or ``"lobatto"``.

    Returns
    -------
    (nodes, weights) : tuple of ndarray
        Both of shape (q,); weights sum to 2.
    """
    if kind == LEGENDRE:
        if q < 1:
            raise ValueError(f"Legendre rule needs q >= 1, got {q}")
        nodes, weights = _leg.leggauss(q)
    elif kind == LOBATTO:
        if q < 2:
            raise ValueError(f"Lobatto rule needs q >= 2, got {q}")
        nodes, weights = _lobatto_rule(q)
    else:
        raise ValueError(f"unknown quadrature kind {kind!r}")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _lobatto_rule(q: int):
    """Gauss-Lobatto nodes (roots of (1-x^2) P'_{q-1}) and weights."""
    if q == 2:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    # interior nodes: roots of P'_{q-1}
    c = np.zeros(q)
    c[-1] = 1.0
    dP = _leg.Legendre(c).deriv()
    interior = np.sort(dP.roots().real)
    # one Newton polish step on P'_{q-1}
    ddP = dP.deriv()
    interior = interior - dP(interior) / ddP(interior)
    nodes = np.concatenate(([-1.0], interior, [1.0]))
    Pq1 = _leg.Legendre(c)
    weights = 2.0 / (q * (q - 1) * Pq1(nodes) ** 2)
    return nodes, weights


class LagrangeBasis:
    """Lagrange interpolation basis on a fixed set of distinct nodes.

    Provides vectorized evaluation of all basis polynomials and their
    first derivatives at arbitrary points via the barycentric formula.
    """

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 1:
            raise ValueError("nodes must be a 1-D array with at least one entry")
        diffs = nodes[:, None] - nodes[None, :]
        if np.any(np.abs(diffs + np.eye(nodes.size)) < 1e-14):
            raise ValueError("nodes must be distinct")
        self.nodes = nodes
        self.n = nodes.size
        if self.n == 1:
            self.bary_w = np.array([1.0])
        else:
            np.fill_diagonal(diffs, 1.0)
            self.bary_w = 1.0 / np.prod(diffs, axis=1)

    def eval(self, taus):
        """Basis values; returns array of shape (len(taus), n)."""
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        if self.n == 1:
            return np.ones((taus.size, 1))
        out = np.empty((taus.size, self.n))
        for j, t in enumerate(taus):
            d = t - self.nodes
            hit = np.abs(d) < 1e-14
            if hit.any():
                row = hit.astype(float)
            else:
                terms = self.bary_w / d
                row = terms / terms.sum()
            out[j] = row
        return out

    def deriv(self, taus):
        """Basis first derivatives; shape (len(taus), n)."""
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        if self.n == 1:
            return np.zeros((taus.size, 1))
        D = self.diff_matrix()
        # L'_s(t) = sum_r D[r, s] * L_r(t) holds only at nodes; for general t
        # use the analytic derivative of the barycentric form instead.
        out = np.empty((taus.size, self.n))
        for j, t in enumerate(taus):
            d = t - self.nodes
            hit = np.where(np.abs(d) < 1e-14)[0]
            if hit.size:
                out[j] = D[hit[0]]
            else:
                g = self.bary_w / d
                s = g.sum()
                sp = -(self.bary_w / d**2).sum()
                # derivative of l_s(t) = g_s / sum(g)
                out[j] = (-self.bary_w / d**2 * s - g * sp) / s**2
        return out

    def diff_matrix(self):
        """Differentiation matrix D with D[j, s] = L'_s(node_j)."""
        if self.n == 1:
            return np.zeros((1, 1))
        x = self.nodes
        w = self.bary_w
        D = (w[None, :] / w[:, None]) / (x[:, None] - x[None, :] + np.eye(self.n))
        np.fill_diagonal(D, 0.0)
        np.fill_diagonal(D, -D.sum(axis=1))
        return D

    def interpolate(self, values, taus):
        """Interpolate nodal values (n, ...) at points taus."""
        B = self.eval(taus)
        return np.tensordot(B, np.asarray(values), axes=(1, 0))
