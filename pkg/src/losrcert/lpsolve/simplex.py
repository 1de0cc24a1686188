"""Dense two-phase tableau simplex in floating point.

Bland's rule is the default pivot rule (guaranteed termination). The inner
loop runs as a numba kernel when available; ``LOSRCERT_NO_NUMBA=1`` selects
the vectorised numpy twin, which follows the identical pivot sequence.

Tableau layout: rows ``0..m-1`` hold the constraints, row ``m`` the reduced
costs; the last column holds the right-hand side (and ``-objective``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import NUMBA_ENABLED, njit

BLAND, DANTZIG = 0, 1
OPTIMAL, UNBOUNDED, ITERATION_LIMIT = 0, 1, 2

COST_TOL = 1e-9
PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
RATIO_RTOL = 1e-12


@njit(cache=True)
def _pivot_nb(T, r, c):
    m1, n1 = T.shape
    piv = T[r, c]
    for k in range(n1):
        T[r, k] /= piv
    for i in range(m1):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for k in range(n1):
                T[i, k] -= f * T[r, k]
            T[i, c] = 0.0


@njit(cache=True)
def _select_nb(T, basis, n_enter, rule, cost_tol, piv_tol):
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    c = -1
    if rule == BLAND:
        for j in range(n_enter):
            if T[m, j] < -cost_tol:
                c = j
                break
    else:
        best = -cost_tol
        for j in range(n_enter):
            if T[m, j] < best:
                best = T[m, j]
                c = j
    if c < 0:
        return -1, -1
    r = -1
    best_ratio = np.inf
    best_var = 1 << 62
    for i in range(m):
        a = T[i, c]
        if a > piv_tol:
            ratio = T[i, rhs] / a
            tol = RATIO_RTOL * max(1.0, abs(best_ratio)) if best_ratio < np.inf else 0.0
            if ratio < best_ratio - tol or (abs(ratio - best_ratio) <= tol and basis[i] < best_var):
                best_ratio = ratio
                best_var = basis[i]
                r = i
    return c, r


@njit(cache=True)
def _run_nb(T, basis, n_enter, rule, max_iter, cost_tol, piv_tol):
    it = 0
    while it < max_iter:
        c, r = _select_nb(T, basis, n_enter, rule, cost_tol, piv_tol)
        if c < 0:
            return OPTIMAL, it
        if r < 0:
            return UNBOUNDED, it
        _pivot_nb(T, r, c)
        basis[r] = c
        it += 1
    return ITERATION_LIMIT, it


def _pivot_np(T, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        T[rows] -= np.outer(col[rows], T[r])
        T[rows, c] = 0.0


def _select_np(T, basis, n_enter, rule, cost_tol, piv_tol):
    m = T.shape[0] - 1
    d = T[m, :n_enter]
    if rule == BLAND:
        cand = np.flatnonzero(d < -cost_tol)
        if not cand.size:
            return -1, -1
        c = int(cand[0])
    else:
        c = int(np.argmin(d)) if n_enter else 0
        if not n_enter or d[c] >= -cost_tol:
            return -1, -1
    col = T[:m, c]
    rows = np.flatnonzero(col > piv_tol)
    if not rows.size:
        return c, -1
    # sequential scan to mirror the kernel's tie handling exactly
    ratios = T[rows, -1] / col[rows]
    r, best_ratio, best_var = -1, np.inf, 1 << 62
    for i, ratio in zip(rows, ratios):
        tol = RATIO_RTOL * max(1.0, abs(best_ratio)) if best_ratio < np.inf else 0.0
        if ratio < best_ratio - tol or (abs(ratio - best_ratio) <= tol and basis[i] < best_var):
            r, best_ratio, best_var = int(i), ratio, basis[i]
    return c, r


def _run_np(T, basis, n_enter, rule, max_iter, cost_tol, piv_tol):
    it = 0
    while it < max_iter:
        c, r = _select_np(T, basis, n_enter, rule, cost_tol, piv_tol)
        if c < 0:
            return OPTIMAL, it
        if r < 0:
            return UNBOUNDED, it
        _pivot_np(T, r, c)
        basis[r] = c
        it += 1
    return ITERATION_LIMIT, it


def run_simplex(T, basis, n_enter, rule=BLAND, max_iter=100_000, use_numba=None):
    """Pivot the tableau in place until optimal; returns ``(status, iterations)``."""
    if use_numba is None:
        use_numba = NUMBA_ENABLED
    fn = _run_nb if use_numba else _run_np
    return fn(T, basis, n_enter, rule, max_iter, COST_TOL, PIVOT_TOL)


def pivot(T, r, c, use_numba=None):
    if use_numba is None:
        use_numba = NUMBA_ENABLED
    (_pivot_nb if use_numba else _pivot_np)(T, r, c)


@dataclass
class DenseResult:
    status: str  # "feasible" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray | None
    y: np.ndarray | None
    objective: float | None
    iterations: int
    phase1_value: float


def _phase1(A, b, rule, max_iter, use_numba):
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A * sign[:, None]
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b * sign
    T[m, :n] = -T[:m, :n].sum(axis=0)
    T[m, -1] = -T[:m, -1].sum()
    basis = np.arange(n, n + m, dtype=np.int64)
    status, it = run_simplex(T, basis, n, rule, max_iter, use_numba)
    return T, basis, sign, status, it


def _basic_solution(A, b, T, basis, n):
    m = A.shape[0]
    x = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i, -1]
    # one refinement step against the original data
    cols = [j for j in basis if j < n]
    if cols:
        r = b - A @ x
        corr, *_ = np.linalg.lstsq(A[:, cols], r, rcond=None)
        cand = x.copy()
        cand[cols] += corr
        if np.max(np.abs(A @ cand - b)) < np.max(np.abs(r)) and cand.min() >= -1e-12:
            x = np.maximum(cand, 0.0)
    return x


def _drive_out_artificials(T, basis, n, use_numba):
    m = T.shape[0] - 1
    redundant = []
    for i in range(m):
        if basis[i] < n:
            continue
        row = np.abs(T[i, :n])
        j = int(np.argmax(row)) if n else -1
        if n and row[j] > PIVOT_TOL:
            pivot(T, i, j, use_numba)
            basis[i] = j
        else:
            redundant.append(i)
    return redundant


def solve_dense(
    A,
    b,
    c=None,
    rule: int = BLAND,
    max_iter: int | None = None,
    use_numba=None,
    feas_tol: float = FEAS_TOL,
) -> DenseResult:
    """Feasibility (phase 1) and optionally minimisation of ``c.x`` (phase 2).

    On infeasibility ``y`` is the phase-one dual, a Farkas vector for the
    original rows (``y.A <= 0``, ``y.b > 0``).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    T, basis, sign, status, it = _phase1(A, b, rule, max_iter, use_numba)
    w = -T[m, -1]
    if status != OPTIMAL:
        return DenseResult("iteration_limit", None, None, None, it, w)
    if w > feas_tol:
        # reduced cost of artificial i is 1 - y_i
        y = (1.0 - T[m, n : n + m]) * sign
        return DenseResult("infeasible", None, y, None, it, w)

    if c is None:
        x = _basic_solution(A, b, T, basis, n)
        return DenseResult("feasible", x, None, None, it, w)

    c = np.asarray(c, dtype=float)
    _drive_out_artificials(T, basis, n, use_numba)
    cb = np.where(basis < n, c[np.minimum(basis, n - 1)], 0.0)
    T[m, :n] = c - cb @ T[:m, :n]
    T[m, n : n + m] = 0.0
    T[m, -1] = -cb @ T[:m, -1]
    status2, it2 = run_simplex(T, basis, n, rule, max_iter, use_numba)
    it += it2
    if status2 == UNBOUNDED:
        return DenseResult("unbounded", None, None, None, it, w)
    if status2 != OPTIMAL:
        return DenseResult("iteration_limit", None, None, None, it, w)
    x = _basic_solution(A, b, T, basis, n)
    return DenseResult("feasible", x, None, float(c @ x), it, w)
