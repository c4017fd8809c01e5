"""Sparse nonlinear-program container with a solver-neutral callback surface.

A problem is ``min J(y)`` subject to ``c_eq(y) = 0``, ``c_in(y) >= 0`` and
box bounds.  Constraint Jacobians are exposed as fixed-pattern triplet
arrays: the (row, col) pattern is decided at assembly time and every
evaluation only refills the value arrays, so the declared pattern is a
superset of the true nonzero set by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp


@dataclass
class EvalResult:
    """One evaluation of the problem callbacks at a point y."""

    objective: float
    gradient: np.ndarray
    c_eq: np.ndarray
    c_in: np.ndarray
    jac_eq: sp.csr_matrix | None = None
    jac_in: sp.csr_matrix | None = None


class NlpProblem:
    """Assembled sparse NLP.

    Parameters
    ----------
    n : int
        Number of optimization variables.
    lb, ub : ndarray
        Box bounds, length n (use +/-inf for free).
    evaluator : callable
        ``evaluator(y, need_jac) -> EvalResult``.
    eq_pattern, in_pattern : (rows, cols) int arrays
        Fixed Jacobian sparsity patterns (triplet form).
    """

    def __init__(self, n, lb, ub, m_eq, m_in, evaluator,
                 eq_pattern, in_pattern, *, var_names=None, row_names=None,
                 meta=None, reentrant=True):
        self.n = int(n)
        self.lb = np.asarray(lb, float)
        self.ub = np.asarray(ub, float)
        if self.lb.shape != (self.n,) or self.ub.shape != (self.n,):
            raise ValueError("bounds must have length n")
        self.m_eq = int(m_eq)
        self.m_in = int(m_in)
        self._evaluator = evaluator
        self.eq_pattern = (np.asarray(eq_pattern[0], dtype=np.int64),
                           np.asarray(eq_pattern[1], dtype=np.int64))
        self.in_pattern = (np.asarray(in_pattern[0], dtype=np.int64),
                           np.asarray(in_pattern[1], dtype=np.int64))
        self.var_names = var_names
        self.row_names = row_names
        self.meta = meta or {}
        self.reentrant = reentrant

    def evaluate(self, y, need_jac=False) -> EvalResult:
        y = np.asarray(y, float)
        if y.shape != (self.n,):
            raise ValueError(f"point has wrong dimension {y.shape}, need ({self.n},)")
        return self._evaluator(y, need_jac)

    def feasibility(self, res: EvalResult) -> float:
        viol = 0.0
        if res.c_eq.size:
            viol = float(np.max(np.abs(res.c_eq)))
        if res.c_in.size:
            viol = max(viol, float(max(0.0, -np.min(res.c_in))))
        return viol

    def dump_json(self, path=None):
        """Debug dump: dimensions, names, bounds and the sparsity pattern."""
        doc = {
            "n": self.n,
            "m_eq": self.m_eq,
            "m_in": self.m_in,
            "lb": self.lb.tolist(),
            "ub": self.ub.tolist(),
            "var_names": self.var_names,
            "row_names": self.row_names,
            "eq_pattern": [self.eq_pattern[0].tolist(), self.eq_pattern[1].tolist()],
            "in_pattern": [self.in_pattern[0].tolist(), self.in_pattern[1].tolist()],
            "meta": {k: v for k, v in self.meta.items() if _json_safe(v)},
        }
        text = json.dumps(doc)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _json_safe(v):
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def pattern_matrix(pattern, values, shape) -> sp.csr_matrix:
    rows, cols = pattern
    return sp.csr_matrix((values, (rows, cols)), shape=shape)
