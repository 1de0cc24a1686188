"""Exact rational two-phase simplex with Bland's rule, for small problems."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .simplex import DenseResult

MAX_EXACT_VARS = 2000


def _frac(v) -> Fraction:
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    return Fraction(float(v))


def _pivot(T, r, c):
    row = T[r]
    piv = row[c]
    if piv != 1:
        T[r] = row = [v / piv for v in row]
    nz = [k for k, v in enumerate(row) if v]
    for i, other in enumerate(T):
        if i == r:
            continue
        f = other[c]
        if f:
            for k in nz:
                other[k] -= f * row[k]


def _run(T, basis, n_enter, max_iter):
    m = len(T) - 1
    it = 0
    while it < max_iter:
        obj = T[m]
        c = next((j for j in range(n_enter) if obj[j] < 0), -1)
        if c < 0:
            return "optimal", it
        r, best, best_var = -1, None, None
        for i in range(m):
            a = T[i][c]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < best_var):
                    r, best, best_var = i, ratio, basis[i]
        if r < 0:
            return "unbounded", it
        _pivot(T, r, c)
        basis[r] = c
        it += 1
    return "iteration_limit", it


def solve_exact(A, b, c=None, max_iter: int = 200_000) -> DenseResult:
    """Like :func:`simplex.solve_dense` but over the rationals.

    Float inputs are converted exactly (every double is a dyadic rational).
    Returned ``x``/``y`` are object arrays of Fractions.
    """
    A = [[_frac(v) for v in row] for row in np.asarray(A, dtype=object)]
    b = [_frac(v) for v in np.asarray(b, dtype=object).reshape(-1)]
    m = len(b)
    n = len(A[0]) if m else 0
    if n > MAX_EXACT_VARS:
        raise ValueError(f"exact mode is limited to {MAX_EXACT_VARS} variables, got {n}")
    sign = [(-1 if bi < 0 else 1) for bi in b]
    T = []
    for i in range(m):
        row = [sign[i] * v for v in A[i]] + [Fraction(int(k == i)) for k in range(m)]
        row.append(sign[i] * b[i])
        T.append(row)
    obj = [Fraction(0)] * (n + m + 1)
    for i in range(m):
        for k in range(n):
            obj[k] -= T[i][k]
        obj[-1] -= T[i][-1]
    T.append(obj)
    basis = list(range(n, n + m))
    status, it = _run(T, basis, n, max_iter)
    w = -T[m][-1]
    if status != "optimal":
        return DenseResult("iteration_limit", None, None, None, it, float(w))
    if w > 0:
        y = np.array([(1 - T[m][n + i]) * sign[i] for i in range(m)], dtype=object)
        return DenseResult("infeasible", None, y, None, it, float(w))

    if c is not None:
        c = [_frac(v) for v in np.asarray(c, dtype=object).reshape(-1)]
        for i in range(m):
            if basis[i] >= n:
                j = next((k for k in range(n) if T[i][k] != 0), -1)
                if j >= 0:
                    _pivot(T, i, j)
                    basis[i] = j
        obj = [Fraction(0)] * (n + m + 1)
        for k in range(n):
            obj[k] = c[k]
        for i in range(m):
            cb = c[basis[i]] if basis[i] < n else Fraction(0)
            if cb:
                for k in range(n + m + 1):
                    if k < n or k == n + m:
                        obj[k] -= cb * T[i][k]
        T[m] = obj
        status, it2 = _run(T, basis, n, max_iter)
        it += it2
        if status != "optimal":
            return DenseResult(status, None, None, None, it, float(w))

    x = np.array([Fraction(0)] * n, dtype=object)
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i][-1]
    objective = None if c is None else sum((ck * xk for ck, xk in zip(c, x)), Fraction(0))
    return DenseResult("feasible", x, None, objective, it, float(w))
