"""Finite-elements-in-time transcription of multiphase optimal control.

Each phase's time domain splits into elements; states are degree p-1
polynomials on Gauss-Lobatto nodes, controls live on the quadrature node
set, and the dynamics enter in weighted-residual (weak) form with boundary
terms, which makes element-boundary continuity a matter of shared boundary
variables rather than collocation conditions.  The weak form is developed
against a degree-p test basis on Gauss-Lobatto nodes of order p+1, giving
p+1 residual equations per element and state: the constant part of those
equations is integrated once per (p, q, rule) triple and cached.

The assembled product is an :class:`~galt.nlp.NlpProblem` whose variable
vector stacks, phase by phase, internal state nodes, element boundary
values, control nodes and the two phase endpoints, followed by any global
parameters (swing-by elements, encounter epochs, ...).  Extra constraint
blocks (departure, arrival, inter-phase links) attach through named
variable references and are kept dense block-wise, sparse globally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, EvaluationError
from .nlp import EvalResult, NlpProblem, pattern_matrix
from .quadrature import LEGENDRE, LOBATTO, LagrangeBasis, gauss_points


# ---------------------------------------------------------------------------
# cached element-level constant matrices

@dataclass(frozen=True)
class ElementMatrices:
    state_nodes: np.ndarray      # (p,) Gauss-Lobatto
    quad_nodes: np.ndarray       # (q,)
    quad_weights: np.ndarray     # (q,)
    Fx: np.ndarray               # (q, p) state basis at quadrature nodes
    W: np.ndarray                # (q, p+1) test basis at quadrature nodes
    Wsig: np.ndarray             # (q, p+1) sigma_k * W[k, s]
    D: np.ndarray                # (p+1, p) quadrature of gdot_s * f_r
    state_basis: LagrangeBasis
    control_basis: LagrangeBasis
    test_basis: LagrangeBasis


@lru_cache(maxsize=None)
def element_matrices(p: int, q: int, kind: str) -> ElementMatrices:
    if p < 1:
        raise ConfigError(f"state order p must be >= 1, got {p}")
    state_nodes = gauss_points(max(p, 2), LOBATTO)[0] if p >= 2 else np.array([0.0])
    quad_nodes, quad_weights = gauss_points(q, kind)
    test_nodes = gauss_points(p + 1, LOBATTO)[0]
    state_basis = LagrangeBasis(state_nodes)
    control_basis = LagrangeBasis(quad_nodes)
    test_basis = LagrangeBasis(test_nodes)
    Fx = state_basis.eval(quad_nodes)                  # (q, p)
    W = test_basis.eval(quad_nodes)                    # (q, p+1)
    Wdot = test_basis.deriv(quad_nodes)                # (q, p+1)
    Wsig = quad_weights[:, None] * W
    D = (quad_weights[:, None] * Wdot).T @ Fx          # (p+1, p)
    return ElementMatrices(state_nodes, quad_nodes, quad_weights, Fx, W, Wsig,
                           D, state_basis, control_basis, test_basis)


# ---------------------------------------------------------------------------
# phase specification

class Dynamics:
    """Right-hand side protocol used by the transcription.

    Subclasses define state/control dimensions and ``rhs``/``jac``; the time
    partial is zero for autonomous systems (the default).
    """

    m: int
    n: int

    def rhs(self, x, u, t):
        raise NotImplementedError

    def jac(self, x, u, t):
        """Returns (A, B, ft): d rhs/dx, d rhs/du, d rhs/dt."""
        raise NotImplementedError


@dataclass
class PathConstraintSpec:
    """Inequality rows collocated at the control nodes, c(x, u, t) >= 0."""

    dim: int
    value: Callable      # (x, u, t) -> (dim,)
    jac: Callable        # (x, u, t) -> (Gx, Gu, gt)
    name: str = "path"
    elements: set[int] | None = None   # None -> all elements


@dataclass
class LagrangeTermSpec:
    """Running-cost integrand accumulated by the element quadrature."""

    value: Callable      # (x, u, t) -> float
    grad: Callable       # (x, u, t) -> (gx, gu)


@dataclass
class PhaseSpec:
    """One trajectory arc and its discretization."""

    name: str
    dynamics: Dynamics
    n_elements: int
    t0_guess: float
    tf_guess: float
    p: int = 5
    quadrature: str = LEGENDRE
    q: int | None = None                       # defaults to p
    fractions: np.ndarray | None = None        # (n_elements+1,), 0..1
    state_lb: np.ndarray | None = None
    state_ub: np.ndarray | None = None
    control_lb: np.ndarray | None = None
    control_ub: np.ndarray | None = None
    t0_bounds: tuple[float, float] | None = None   # None -> fixed at guess
    tf_bounds: tuple[float, float] | None = None
    path_constraints: list[PathConstraintSpec] = field(default_factory=list)
    lagrange: LagrangeTermSpec | None = None
    control_box_per_element: dict[int, tuple[np.ndarray, np.ndarray]] = field(
        default_factory=dict)
    coast_elements: set[int] = field(default_factory=set)

    def __post_init__(self):
        if self.n_elements < 1:
            raise ConfigError("a phase needs at least one element")
        if self.q is None:
            self.q = self.p
        if self.fractions is None:
            self.fractions = np.linspace(0.0, 1.0, self.n_elements + 1)
        else:
            self.fractions = np.asarray(self.fractions, float)
            if (self.fractions.shape != (self.n_elements + 1,)
                    or abs(self.fractions[0]) > 1e-14
                    or abs(self.fractions[-1] - 1.0) > 1e-14
                    or np.any(np.diff(self.fractions) <= 0)):
                raise ConfigError("fractions must increase from 0 to 1")
        m, n = self.dynamics.m, self.dynamics.n
        if self.state_lb is None:
            self.state_lb = np.full(m, -np.inf)
        if self.state_ub is None:
            self.state_ub = np.full(m, np.inf)
        if self.control_lb is None:
            self.control_lb = np.full(n, -np.inf)
        if self.control_ub is None:
            self.control_ub = np.full(n, np.inf)


# ---------------------------------------------------------------------------
# named references into the variable vector (for external constraint blocks)

@dataclass(frozen=True)
class VarRef:
    """Symbolic reference resolved to global indices at assembly.

    kinds: ``boundary`` (phase, element-boundary index), ``time`` (phase,
    0 for t0 / 1 for tf), ``param`` (name), ``control`` (phase, element,
    node), ``state_node`` (phase, element, node).
    """

    kind: str
    phase: int = -1
    index: int = 0
    node: int = 0
    name: str = ""


@dataclass
class ConstraintBlock:
    """Dense block of equality or inequality rows over a few variables."""

    n_rows: int
    kind: str                    # "eq" or "in"
    refs: list[VarRef]
    fun: Callable                # (subvecs, need_jac) -> (vals, jacs | None)
    name: str = "block"


@dataclass
class MayerTermSpec:
    """Endpoint/parameter objective contribution."""

    refs: list[VarRef]
    fun: Callable                # (subvecs) -> (value, grads)
    name: str = "mayer"


# ---------------------------------------------------------------------------
# the transcription/assembly product

class Transcription:
    """Multiphase finite-element transcription assembled into an NLP."""

    def __init__(self, phases: Sequence[PhaseSpec],
                 blocks: Sequence[ConstraintBlock] = (),
                 params: dict[str, dict] | None = None,
                 mayer_terms: Sequence[MayerTermSpec] = (),
                 alias_boundaries: bool = True):
        self.phases = list(phases)
        self.blocks = list(blocks)
        self.mayer_terms = list(mayer_terms)
        self.alias_boundaries = alias_boundaries
        # params: name -> {"dim": d, "lb": array, "ub": array, "guess": array}
        self.params = params or {}
        self._layout()
        self._pattern()

    # -- layout -------------------------------------------------------------

    def _layout(self):
        off = 0
        self.x_off, self.b_off, self.u_off, self.t_off = [], [], [], []
        self.mats = []
        for spec in self.phases:
            m, n = spec.dynamics.m, spec.dynamics.n
            N, p, q = spec.n_elements, spec.p, spec.q
            self.mats.append(element_matrices(p, q, spec.quadrature))
            self.x_off.append(off); off += N * p * m
            if self.alias_boundaries:
                self.b_off.append(off); off += (N + 1) * m
            else:
                self.b_off.append(off); off += 2 * N * m
            self.u_off.append(off); off += N * q * n
            self.t_off.append(off); off += 2
        self.param_off = {}
        self.param_dim = {}
        for name, info in self.params.items():
            d = int(info["dim"])
            self.param_off[name] = off
            self.param_dim[name] = d
            off += d
        self.n = off

        lb = np.full(self.n, -np.inf)
        ub = np.full(self.n, np.inf)
        for j, spec in enumerate(self.phases):
            m, n = spec.dynamics.m, spec.dynamics.n
            N, p, q = spec.n_elements, spec.p, spec.q
            xs = self.x_slice(j)
            lb[xs] = np.tile(spec.state_lb, N * p)
            ub[xs] = np.tile(spec.state_ub, N * p)
            bs = self.b_slice(j)
            reps = (N + 1) if self.alias_boundaries else 2 * N
            lb[bs] = np.tile(spec.state_lb, reps)
            ub[bs] = np.tile(spec.state_ub, reps)
            for i in range(N):
                us = self.u_slice(j, i)
                clb, cub = spec.control_box_per_element.get(
                    i, (spec.control_lb, spec.control_ub))
                lb[us] = np.tile(clb, q)
                ub[us] = np.tile(cub, q)
            t0b = spec.t0_bounds or (spec.t0_guess, spec.t0_guess)
            tfb = spec.tf_bounds or (spec.tf_guess, spec.tf_guess)
            lb[self.t_off[j]], ub[self.t_off[j]] = t0b
            lb[self.t_off[j] + 1], ub[self.t_off[j] + 1] = tfb
        for name, info in self.params.items():
            s = self.param_slice(name)
            lb[s] = info.get("lb", -np.inf)
            ub[s] = info.get("ub", np.inf)
        self.lb, self.ub = lb, ub

    # index helpers
    def x_slice(self, j, i=None):
        m, p = self.phases[j].dynamics.m, self.phases[j].p
        if i is None:
            return slice(self.x_off[j], self.x_off[j] + self.phases[j].n_elements * p * m)
        start = self.x_off[j] + i * p * m
        return slice(start, start + p * m)

    def b_indices(self, j, i):
        """Global indices of boundary-value i of phase j (m entries)."""
        m = self.phases[j].dynamics.m
        if self.alias_boundaries:
            start = self.b_off[j] + i * m
            return np.arange(start, start + m)
        # duplicated boundaries: i-th junction maps to (left element's right
        # node) except the phase start, which is element 0's left node
        N = self.phases[j].n_elements
        if i == 0:
            start = self.b_off[j]
        else:
            start = self.b_off[j] + ((i - 1) * 2 + 1) * m
        return np.arange(start, start + m)

    def b_slice(self, j):
        m = self.phases[j].dynamics.m
        N = self.phases[j].n_elements
        count = (N + 1) if self.alias_boundaries else 2 * N
        return slice(self.b_off[j], self.b_off[j] + count * m)

    def element_left_b(self, j, i):
        """Indices of element i's own left boundary variable."""
        m = self.phases[j].dynamics.m
        if self.alias_boundaries:
            start = self.b_off[j] + i * m
        else:
            start = self.b_off[j] + (2 * i) * m
        return np.arange(start, start + m)

    def element_right_b(self, j, i):
        m = self.phases[j].dynamics.m
        if self.alias_boundaries:
            start = self.b_off[j] + (i + 1) * m
        else:
            start = self.b_off[j] + (2 * i + 1) * m
        return np.arange(start, start + m)

    def u_slice(self, j, i=None, k=None):
        spec = self.phases[j]
        n, q = spec.dynamics.n, spec.q
        if i is None:
            return slice(self.u_off[j], self.u_off[j] + spec.n_elements * q * n)
        start = self.u_off[j] + i * q * n
        if k is None:
            return slice(start, start + q * n)
        return slice(start + k * n, start + (k + 1) * n)

    def t_indices(self, j):
        return self.t_off[j], self.t_off[j] + 1

    def param_slice(self, name):
        return slice(self.param_off[name], self.param_off[name] + self.param_dim[name])

    def resolve(self, ref: VarRef) -> np.ndarray:
        if ref.kind == "boundary":
            return self.b_indices(ref.phase, ref.index)
        if ref.kind == "boundary_last":
            return self.b_indices(ref.phase, self.phases[ref.phase].n_elements)
        if ref.kind == "time":
            return np.array([self.t_off[ref.phase] + ref.index])
        if ref.kind == "param":
            s = self.param_slice(ref.name)
            return np.arange(s.start, s.stop)
        if ref.kind == "control":
            s = self.u_slice(ref.phase, ref.index, ref.node)
            return np.arange(s.start, s.stop)
        if ref.kind == "state_node":
            spec = self.phases[ref.phase]
            m, p = spec.dynamics.m, spec.p
            start = self.x_off[ref.phase] + (ref.index * p + ref.node) * m
            return np.arange(start, start + m)
        raise ConfigError(f"unknown variable reference kind {ref.kind!r}")

    # -- constraint layout ----------------------------------------------------

    def _pattern(self):
        eq_rows, eq_cols = [], []
        in_rows, in_cols = [], []
        self._eq_blocks = []   # (kind-tag, metadata...) evaluation plan
        self._in_blocks = []
        row_eq = 0
        row_in = 0
        self.residual_row_start = []
        for j, spec in enumerate(self.phases):
            m, n = spec.dynamics.m, spec.dynamics.n
            N, p, q = spec.n_elements, spec.p, spec.q
            self.residual_row_start.append(row_eq)
            n_res = (p + 1) * m
            t0i, tfi = self.t_indices(j)
            for i in range(N):
                cols = np.concatenate([
                    np.arange(self.x_slice(j, i).start, self.x_slice(j, i).stop),
                    np.arange(self.u_slice(j, i).start, self.u_slice(j, i).stop),
                    self.b_indices(j, i), self.b_indices(j, i + 1),
                    [t0i, tfi],
                ])
                rows = np.arange(row_eq, row_eq + n_res)
                eq_rows.append(np.repeat(rows, cols.size))
                eq_cols.append(np.tile(cols, n_res))
                row_eq += n_res
            if not self.alias_boundaries:
                # explicit junction-continuity rows between elements
                for i in range(1, N):
                    left = self.b_off[j] + ((i - 1) * 2 + 1) * m
                    right = self.b_off[j] + (i * 2) * m
                    rows = np.arange(row_eq, row_eq + m)
                    eq_rows.append(np.concatenate([rows, rows]))
                    eq_cols.append(np.concatenate([np.arange(left, left + m),
                                                   np.arange(right, right + m)]))
                    row_eq += m
            for pc in spec.path_constraints:
                els = range(N) if pc.elements is None else sorted(pc.elements)
                for i in els:
                    for k in range(q):
                        cols = np.concatenate([
                            np.arange(self.x_slice(j, i).start, self.x_slice(j, i).stop),
                            np.arange(self.u_slice(j, i, k).start,
                                      self.u_slice(j, i, k).stop),
                            [t0i, tfi],
                        ])
                        rows = np.arange(row_in, row_in + pc.dim)
                        in_rows.append(np.repeat(rows, cols.size))
                        in_cols.append(np.tile(cols, pc.dim))
                        row_in += pc.dim

        self.block_row_start = []
        for blk in self.blocks:
            idx = np.concatenate([self.resolve(r) for r in blk.refs])
            if blk.kind == "eq":
                rows = np.arange(row_eq, row_eq + blk.n_rows)
                self.block_row_start.append(("eq", row_eq, idx))
                eq_rows.append(np.repeat(rows, idx.size))
                eq_cols.append(np.tile(idx, blk.n_rows))
                row_eq += blk.n_rows
            else:
                rows = np.arange(row_in, row_in + blk.n_rows)
                self.block_row_start.append(("in", row_in, idx))
                in_rows.append(np.repeat(rows, idx.size))
                in_cols.append(np.tile(idx, blk.n_rows))
                row_in += blk.n_rows

        self.m_eq, self.m_in = row_eq, row_in
        self._eq_pattern = (np.concatenate(eq_rows) if eq_rows else np.empty(0, np.int64),
                            np.concatenate(eq_cols) if eq_cols else np.empty(0, np.int64))
        self._in_pattern = (np.concatenate(in_rows) if in_rows else np.empty(0, np.int64),
                            np.concatenate(in_cols) if in_cols else np.empty(0, np.int64))

        self._mayer_resolved = [(term, [self.resolve(r) for r in term.refs])
                                for term in self.mayer_terms]

    # -- evaluation -----------------------------------------------------------

    def phase_times(self, y, j):
        t0i, tfi = self.t_indices(j)
        return y[t0i], y[tfi]

    def _element_eval(self, y, j, i, need_jac):
        """Residuals and (optionally) the dense local Jacobian of element i."""
        spec = self.phases[j]
        em = self.mats[j]
        m, n = spec.dynamics.m, spec.dynamics.n
        p, q = spec.p, spec.q
        t0, tf = self.phase_times(y, j)
        fr = spec.fractions
        dfrac = fr[i + 1] - fr[i]
        dt = (tf - t0) * dfrac
        x_nodes = y[self.x_slice(j, i)].reshape(p, m)
        u_nodes = y[self.u_slice(j, i)].reshape(q, n)
        xb_l = y[self.b_indices(j, i)]
        xb_r = y[self.b_indices(j, i + 1)]
        theta = fr[i] + dfrac * (em.quad_nodes + 1.0) / 2.0   # (q,)
        t_k = t0 + (tf - t0) * theta
        x_at_q = em.Fx @ x_nodes                               # (q, m)

        F = np.empty((q, m))
        A = B = ft = None
        if need_jac:
            A = np.empty((q, m, m))
            B = np.empty((q, m, n))
            ft = np.empty((q, m))
        for k in range(q):
            F[k] = spec.dynamics.rhs(x_at_q[k], u_nodes[k], t_k[k])
            if need_jac:
                A[k], B[k], ft[k] = spec.dynamics.jac(x_at_q[k], u_nodes[k], t_k[k])

        R = em.D @ x_nodes + 0.5 * dt * (em.Wsig.T @ F)        # (p+1, m)
        R[0] += xb_l
        R[p] -= xb_r

        if not need_jac:
            return R.reshape(-1), None, (F, x_at_q, u_nodes, t_k, dt, theta)

        n_res = (p + 1) * m
        ncols = p * m + q * n + 2 * m + 2
        J = np.zeros((n_res, ncols))
        # d/dx_nodes: D kron I + (dt/2) sum_k Wsig[k,s] A_k Fx[k,r]
        for s in range(p + 1):
            for r in range(p):
                blockJ = em.D[s, r] * np.eye(m)
                for k in range(q):
                    coeff = 0.5 * dt * em.Wsig[k, s] * em.Fx[k, r]
                    if coeff != 0.0:
                        blockJ = blockJ + coeff * A[k]
                J[s * m:(s + 1) * m, r * m:(r + 1) * m] = blockJ
        # d/du_nodes
        off_u = p * m
        for s in range(p + 1):
            for k in range(q):
                coeff = 0.5 * dt * em.Wsig[k, s]
                if coeff != 0.0:
                    J[s * m:(s + 1) * m, off_u + k * n:off_u + (k + 1) * n] = coeff * B[k]
        # boundary values
        off_b = p * m + q * n
        J[0:m, off_b:off_b + m] = np.eye(m)
        J[p * m:(p + 1) * m, off_b + m:off_b + 2 * m] = -np.eye(m)
        # times: dt depends on (tf - t0); t_k = t0 + (tf - t0) theta_k
        off_t = off_b + 2 * m
        WF = em.Wsig.T @ F                                     # (p+1, m)
        Wft_tf = em.Wsig.T @ (ft * theta[:, None])
        Wft_t0 = em.Wsig.T @ (ft * (1.0 - theta)[:, None])
        J[:, off_t] = (-0.5 * dfrac * WF + 0.5 * dt * Wft_t0).reshape(-1)
        J[:, off_t + 1] = (0.5 * dfrac * WF + 0.5 * dt * Wft_tf).reshape(-1)
        return R.reshape(-1), J, (F, x_at_q, u_nodes, t_k, dt, theta)

    def evaluate(self, y, need_jac=False) -> EvalResult:
        y = np.asarray(y, float)
        c_eq = np.empty(self.m_eq)
        c_in = np.empty(self.m_in)
        eq_vals = [] if need_jac else None
        in_vals = [] if need_jac else None
        obj = 0.0
        grad = np.zeros(self.n)

        row_eq = 0
        row_in = 0
        try:
            for j, spec in enumerate(self.phases):
                m, n = spec.dynamics.m, spec.dynamics.n
                N, p, q = spec.n_elements, spec.p, spec.q
                em = self.mats[j]
                t0i, tfi = self.t_indices(j)
                t0, tf = y[t0i], y[tfi]
                n_res = (p + 1) * m
                for i in range(N):
                    R, J, extras = self._element_eval(y, j, i, need_jac)
                    c_eq[row_eq:row_eq + n_res] = R
                    row_eq += n_res
                    if need_jac:
                        eq_vals.append(J.reshape(-1))
                    # Lagrange running cost on this element
                    if spec.lagrange is not None:
                        F, x_at_q, u_nodes, t_k, dt, theta = extras
                        dfrac = spec.fractions[i + 1] - spec.fractions[i]
                        Lk = np.array([spec.lagrange.value(x_at_q[k], u_nodes[k], t_k[k])
                                       for k in range(q)])
                        obj += 0.5 * dt * float(em.quad_weights @ Lk)
                        for k in range(q):
                            gx, gu = spec.lagrange.grad(x_at_q[k], u_nodes[k], t_k[k])
                            w = 0.5 * dt * em.quad_weights[k]
                            grad[self.u_slice(j, i, k)] += w * np.asarray(gu)
                            gx = np.asarray(gx)
                            if np.any(gx):
                                xs = self.x_slice(j, i)
                                contrib = np.outer(em.Fx[k], gx).reshape(-1)
                                grad[xs.start:xs.stop] += w * contrib
                        dJ_ddt = 0.5 * dfrac * float(em.quad_weights @ Lk)
                        grad[t0i] += -dJ_ddt
                        grad[tfi] += dJ_ddt
                if not self.alias_boundaries:
                    for i in range(1, N):
                        left = self.b_off[j] + ((i - 1) * 2 + 1) * m
                        right = self.b_off[j] + (i * 2) * m
                        c_eq[row_eq:row_eq + m] = y[left:left + m] - y[right:right + m]
                        row_eq += m
                        if need_jac:
                            eq_vals.append(np.concatenate([np.ones(m), -np.ones(m)]))
                for pc in spec.path_constraints:
                    els = range(N) if pc.elements is None else sorted(pc.elements)
                    for i in els:
                        x_nodes = y[self.x_slice(j, i)].reshape(p, m)
                        u_nodes = y[self.u_slice(j, i)].reshape(q, n)
                        fr = spec.fractions
                        dfrac = fr[i + 1] - fr[i]
                        theta = fr[i] + dfrac * (em.quad_nodes + 1.0) / 2.0
                        t_k = t0 + (tf - t0) * theta
                        x_at_q = em.Fx @ x_nodes
                        for k in range(q):
                            vals = pc.value(x_at_q[k], u_nodes[k], t_k[k])
                            c_in[row_in:row_in + pc.dim] = vals
                            row_in += pc.dim
                            if need_jac:
                                Gx, Gu, gt = pc.jac(x_at_q[k], u_nodes[k], t_k[k])
                                Jrow = np.zeros((pc.dim, p * m + n + 2))
                                Jrow[:, :p * m] = np.einsum(
                                    "r,dm->drm", em.Fx[k], np.asarray(Gx)
                                ).transpose(1, 0, 2).reshape(pc.dim, p * m)
                                Jrow[:, p * m:p * m + n] = Gu
                                gt = np.asarray(gt)
                                Jrow[:, p * m + n] = gt * (1.0 - theta[k])
                                Jrow[:, p * m + n + 1] = gt * theta[k]
                                in_vals.append(Jrow.reshape(-1))

            for blk, (kind, row0, idx) in zip(self.blocks, self.block_row_start):
                subvecs = [y[self.resolve(r)] for r in blk.refs]
                vals, jacs = blk.fun(subvecs, need_jac)
                vals = np.asarray(vals, float)
                if vals.shape != (blk.n_rows,):
                    raise EvaluationError(
                        f"block {blk.name} returned {vals.shape}, wants ({blk.n_rows},)")
                if kind == "eq":
                    c_eq[row0:row0 + blk.n_rows] = vals
                else:
                    c_in[row0:row0 + blk.n_rows] = vals
                if need_jac:
                    dense = np.hstack([np.asarray(jc, float) for jc in jacs])
                    (eq_vals if kind == "eq" else in_vals).append(dense.reshape(-1))
        except EvaluationError:
            raise
        except (ValueError, FloatingPointError, ArithmeticError) as exc:
            raise EvaluationError(f"transcription evaluation failed: {exc}", y=y) from exc

        for term, idx_list in self._mayer_resolved:
            subvecs = [y[ix] for ix in idx_list]
            val, grads = term.fun(subvecs)
            obj += val
            for ix, g in zip(idx_list, grads):
                grad[ix] += np.asarray(g, float)

        jac_eq = jac_in = None
        if need_jac:
            eq_data = np.concatenate(eq_vals) if eq_vals else np.empty(0)
            in_data = np.concatenate(in_vals) if in_vals else np.empty(0)
            jac_eq = pattern_matrix(self._eq_pattern, eq_data, (self.m_eq, self.n))
            jac_in = pattern_matrix(self._in_pattern, in_data, (self.m_in, self.n))
        return EvalResult(obj, grad, c_eq, c_in, jac_eq, jac_in)

    # -- NLP export -----------------------------------------------------------

    def problem(self, meta=None) -> NlpProblem:
        return NlpProblem(self.n, self.lb, self.ub, self.m_eq, self.m_in,
                          self.evaluate, self._eq_pattern, self._in_pattern,
                          meta=meta)

    # -- initial point helpers -------------------------------------------------

    def set_phase_guess(self, y, j, states_fn, controls_fn=None):
        """Fill phase j of y from callables state(t)->(m,), control(t)->(n,)."""
        spec = self.phases[j]
        em = self.mats[j]
        m, n = spec.dynamics.m, spec.dynamics.n
        t0, tf = spec.t0_guess, spec.tf_guess
        fr = spec.fractions
        for i in range(spec.n_elements):
            dt0 = t0 + (tf - t0) * fr[i]
            dt1 = t0 + (tf - t0) * fr[i + 1]
            for r, tau in enumerate(em.state_nodes):
                t = dt0 + (dt1 - dt0) * (tau + 1.0) / 2.0
                sl = self.x_slice(j, i)
                y[sl.start + r * m:sl.start + (r + 1) * m] = states_fn(t)
            for k, tau in enumerate(em.quad_nodes):
                t = dt0 + (dt1 - dt0) * (tau + 1.0) / 2.0
                u = controls_fn(t) if controls_fn is not None else np.zeros(n)
                y[self.u_slice(j, i, k)] = u
        for i in range(spec.n_elements + 1):
            t = t0 + (tf - t0) * fr[i]
            y[self.b_indices(j, i)] = states_fn(t)
            if not self.alias_boundaries and 0 < i < spec.n_elements:
                # fill both duplicated junction variables
                left = self.b_off[j] + ((i - 1) * 2 + 1) * m
                right = self.b_off[j] + (i * 2) * m
                y[left:left + m] = states_fn(t)
                y[right:right + m] = states_fn(t)
        t0i, tfi = self.t_indices(j)
        y[t0i], y[tfi] = t0, tf
        return y

    def initial_point(self) -> np.ndarray:
        y = np.zeros(self.n)
        for j, spec in enumerate(self.phases):
            t0i, tfi = self.t_indices(j)
            y[t0i], y[tfi] = spec.t0_guess, spec.tf_guess
        for name, info in self.params.items():
            if "guess" in info:
                y[self.param_slice(name)] = info["guess"]
        return y

    # -- polynomial trajectory extraction ---------------------------------------

    def extract(self, y) -> "PolynomialTrajectory":
        y = np.asarray(y, float)
        phases = []
        for j, spec in enumerate(self.phases):
            m, n = spec.dynamics.m, spec.dynamics.n
            N, p, q = spec.n_elements, spec.p, spec.q
            t0, tf = self.phase_times(y, j)
            x_nodes = y[self.x_slice(j)].reshape(N, p, m)
            u_nodes = y[self.u_slice(j)].reshape(N, q, n)
            bvals = np.array([y[self.b_indices(j, i)] for i in range(N + 1)])
            phases.append(PhaseTrajectory(
                name=spec.name, t0=float(t0), tf=float(tf),
                fractions=spec.fractions.copy(), x_nodes=x_nodes,
                u_nodes=u_nodes, boundary_values=bvals,
                state_basis=self.mats[j].state_basis,
                control_basis=self.mats[j].control_basis))
        return PolynomialTrajectory(phases)


# ---------------------------------------------------------------------------
# extracted trajectory

@dataclass
class PhaseTrajectory:
    """Element-wise polynomial representation of one phase."""

    name: str
    t0: float
    tf: float
    fractions: np.ndarray
    x_nodes: np.ndarray          # (N, p, m)
    u_nodes: np.ndarray          # (N, q, n)
    boundary_values: np.ndarray  # (N+1, m)
    state_basis: LagrangeBasis
    control_basis: LagrangeBasis

    def _locate(self, t):
        span = self.tf - self.t0
        s = (t - self.t0) / span
        s = min(max(s, 0.0), 1.0)
        i = int(np.searchsorted(self.fractions, s, side="right") - 1)
        i = min(max(i, 0), self.x_nodes.shape[0] - 1)
        f0, f1 = self.fractions[i], self.fractions[i + 1]
        tau = 2.0 * (s - f0) / (f1 - f0) - 1.0
        return i, tau

    def state(self, t):
        i, tau = self._locate(t)
        return self.state_basis.interpolate(self.x_nodes[i], [tau])[0]

    def control(self, t):
        i, tau = self._locate(t)
        return self.control_basis.interpolate(self.u_nodes[i], [tau])[0]

    def sample(self, count):
        ts = np.linspace(self.t0, self.tf, count)
        xs = np.array([self.state(t) for t in ts])
        us = np.array([self.control(t) for t in ts])
        return ts, xs, us


@dataclass
class PolynomialTrajectory:
    """All phases of a solution as evaluable piecewise polynomials."""

    phases: list[PhaseTrajectory]

    def phase(self, j) -> PhaseTrajectory:
        return self.phases[j]


# ---------------------------------------------------------------------------
# sequential element marching (square Newton solves), used for first guesses
# and propagation-fidelity checks

def march_phase(spec: PhaseSpec, x0, t0: float, tf: float,
                controls_fn: Callable | None = None,
                newton_tol: float = 1e-12, max_newton: int = 30):
    """Propagate a phase by solving its element equations sequentially.

    Given the left boundary value of each element, the (p+1)*m residual
    equations determine the p internal nodes and the right boundary value:
    a square Newton solve per element.  Controls are prescribed, not free.

    Returns
    -------
    (x_nodes, boundary_values, u_nodes) : tuple of ndarray
        Shapes (N, p, m), (N+1, m), (N, q, n).
    """
    em = element_matrices(spec.p, spec.q, spec.quadrature)
    m, n = spec.dynamics.m, spec.dynamics.n
    N, p, q = spec.n_elements, spec.p, spec.q
    fr = spec.fractions
    x_nodes = np.empty((N, p, m))
    u_nodes = np.zeros((N, q, n))
    bvals = np.empty((N + 1, m))
    bvals[0] = np.asarray(x0, float)

    for i in range(N):
        ta = t0 + (tf - t0) * fr[i]
        tb = t0 + (tf - t0) * fr[i + 1]
        dt = tb - ta
        t_k = ta + dt * (em.quad_nodes + 1.0) / 2.0
        if controls_fn is not None:
            for k in range(q):
                u_nodes[i, k] = controls_fn(t_k[k])
        xb_l = bvals[i]
        z = np.concatenate([np.tile(xb_l, p), xb_l])  # [x_nodes; xb_r]
        scale = max(1.0, float(np.max(np.abs(xb_l))))
        ok = False
        for _ in range(max_newton):
            xn = z[:p * m].reshape(p, m)
            xb_r = z[p * m:]
            x_at_q = em.Fx @ xn
            F = np.empty((q, m))
            A = np.empty((q, m, m))
            for k in range(q):
                F[k] = spec.dynamics.rhs(x_at_q[k], u_nodes[i, k], t_k[k])
                A[k], _, _ = spec.dynamics.jac(x_at_q[k], u_nodes[i, k], t_k[k])
            R = em.D @ xn + 0.5 * dt * (em.Wsig.T @ F)
            R[0] += xb_l
            R[p] -= xb_r
            Rflat = R.reshape(-1)
            if np.max(np.abs(Rflat)) < newton_tol * scale:
                ok = True
                break
            J = np.zeros(((p + 1) * m, (p + 1) * m))
            for s in range(p + 1):
                for r in range(p):
                    blockJ = em.D[s, r] * np.eye(m)
                    for k in range(q):
                        coeff = 0.5 * dt * em.Wsig[k, s] * em.Fx[k, r]
                        if coeff != 0.0:
                            blockJ = blockJ + coeff * A[k]
                    J[s * m:(s + 1) * m, r * m:(r + 1) * m] = blockJ
            J[p * m:(p + 1) * m, p * m:(p + 1) * m] = -np.eye(m)
            try:
                dz = np.linalg.solve(J, -Rflat)
            except np.linalg.LinAlgError as exc:
                raise EvaluationError(f"element Newton solve singular: {exc}") from exc
            z = z + dz
        if not ok:
            raise EvaluationError(
                f"element {i} Newton iteration did not reach {newton_tol}")
        x_nodes[i] = z[:p * m].reshape(p, m)
        bvals[i + 1] = z[p * m:]
    return x_nodes, bvals, u_nodes
