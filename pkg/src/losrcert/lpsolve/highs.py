"""Sparse backend: HiGHS through scipy, on the elastic (slack) formulation.

``min 1.(s+ + s-)  s.t.  A q + s+ - s- = b,  q, s >= 0`` is always feasible;
a positive optimum is the same phase-one value the dense simplex computes and
its equality duals form a Farkas vector for ``A q = b, q >= 0``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .simplex import DenseResult

OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": True,
}


def solve_highs(A, b, feas_tol: float = 1e-9) -> DenseResult:
    A = sp.csr_matrix(A)
    m, n = A.shape
    if m == 0:
        return DenseResult("feasible", np.zeros(n), None, None, 0, 0.0)
    eye = sp.identity(m, format="csr")
    big = sp.hstack([A, eye, -eye], format="csc")
    c = np.concatenate([np.zeros(n), np.ones(2 * m)])
    res = linprog(c, A_eq=big, b_eq=b, bounds=(0, None), method="highs", options=OPTIONS)
    iters = int(getattr(res, "nit", 0) or 0)
    if res.status != 0:
        return DenseResult("iteration_limit", None, None, None, iters, np.nan)
    w = float(res.fun)
    if w <= feas_tol:
        return DenseResult("feasible", np.maximum(res.x[:n], 0.0), None, None, iters, w)
    y = np.asarray(res.eqlin.marginals, dtype=float)
    return DenseResult("infeasible", None, y, None, iters, w)
