"""Solver-independent checking of Farkas infeasibility certificates.

For ``A q = b, q >= 0`` a vector ``y`` proves infeasibility when ``y.A <= 0``
and ``y.b > 0``. Floating-point certificates rarely make ``y.A`` exactly
nonpositive, so the check subtracts the worst case the positive entries can
contribute, using upper bounds on ``q`` implied by the problem itself
(rows with nonnegative coefficients and nonnegative right-hand side, such as
normalization rows). The remaining margin is the certificate gap.

Columns without an implied bound must have ``(y.A)_j <= 0``; in float mode a
residue up to ``UNBOUNDED_TOL`` (relative to ``|y| * |A|``) is read as zero,
since rounding in ``y.A`` alone produces that much. Exact mode has no slack.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import TextIO

import numpy as np

from .problem import LpProblem

MIN_GAP = 1e-9
UNBOUNDED_TOL = 1e-12


def implied_upper_bounds(lp: LpProblem) -> np.ndarray:
    A = lp.A
    ub = np.full(lp.n_vars, np.inf)
    for i in range(lp.n_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        vals = A.data[lo:hi]
        if hi == lo or lp.b[i] < 0 or np.any(vals < 0):
            continue
        cols = A.indices[lo:hi]
        pos = vals > 0
        np.minimum.at(ub, cols[pos], lp.b[i] / vals[pos])
    return ub


def certificate_gap(lp: LpProblem, y, exact: bool = False):
    """``y.b`` minus the largest value ``y.A q`` can reach on the implied box.

    Returns ``-inf`` when a positive entry of ``y.A`` hits an unbounded variable.
    With ``exact=True`` the arithmetic is carried out in rationals.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (lp.n_rows,) or not np.all(np.isfinite(y)):
        return -np.inf
    ub = implied_upper_bounds(lp)
    if exact:
        return _exact_gap(lp, y, ub)
    r = lp.A.T @ y
    free = ~np.isfinite(ub)
    if np.any(free):
        amax = float(np.max(np.abs(lp.A.data))) if lp.A.nnz else 0.0
        tol = UNBOUNDED_TOL * max(1.0, float(np.max(np.abs(y))) * amax)
        if np.any(r[free] > tol):
            return -np.inf
    pos = (r > 0) & ~free
    slack = float(np.dot(r[pos], ub[pos]))
    return float(np.dot(lp.b, y)) - slack


def _exact_gap(lp: LpProblem, y: np.ndarray, ub: np.ndarray):
    At = lp.A.T.tocsr()
    fy = [Fraction(float(v)) for v in y]
    total = sum((Fraction(float(b)) * v for b, v in zip(lp.b, fy) if v), Fraction(0))
    for j in range(lp.n_vars):
        lo, hi = At.indptr[j], At.indptr[j + 1]
        r = sum(
            (Fraction(float(a)) * fy[i] for i, a in zip(At.indices[lo:hi], At.data[lo:hi])),
            Fraction(0),
        )
        if r > 0:
            if not np.isfinite(ub[j]):
                return -np.inf
            # ub came from a float division; bound it from above exactly
            total -= r * _exact_ub(lp, j)
    return total


def _exact_ub(lp: LpProblem, j: int) -> Fraction:
    col = lp.A[:, j].tocoo()
    best = None
    for i, a in zip(col.row, col.data):
        lo, hi = lp.A.indptr[i], lp.A.indptr[i + 1]
        if lp.b[i] < 0 or np.any(lp.A.data[lo:hi] < 0) or a <= 0:
            continue
        val = Fraction(float(lp.b[i])) / Fraction(float(a))
        best = val if best is None else min(best, val)
    return best


def validate_certificate(lp: LpProblem, y, min_gap: float = MIN_GAP, exact: bool = False) -> bool:
    try:
        y = np.asarray(y, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        return False
    if y.shape != (lp.n_rows,):
        return False
    gap = certificate_gap(lp, y, exact=exact)
    return bool(gap >= min_gap)


def explain(lp: LpProblem, y, tol: float = 1e-12) -> dict[str, float]:
    """Total |weight| the certificate puts on each constraint family."""
    y = np.asarray(y, dtype=float)
    out = {}
    for k, name in enumerate(lp.kind_names):
        w = float(np.abs(y[lp.row_kind == k]).sum())
        if w > tol:
            out[name] = w
    return out


def write_certificate(y, fh: TextIO, gap: float | None = None, meta: dict | None = None):
    data = {"format": "farkas-certificate", "n_rows": len(y), "y": [format(float(v), ".17g") for v in y]}
    if gap is not None:
        data["gap"] = format(float(gap), ".17g")
    if meta:
        data["meta"] = meta
    json.dump(data, fh, indent=1)


def read_certificate(fh: TextIO) -> np.ndarray:
    data = json.load(fh)
    y = np.array([float(v) for v in data["y"]])
    if len(y) != int(data["n_rows"]):
        raise ValueError("certificate length does not match n_rows")
    return y
