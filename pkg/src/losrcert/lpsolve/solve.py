"""Backend-neutral feasibility solving with verified witnesses.

A verdict is only ever reported together with its evidence: a primal point
satisfying every row to 1e-8 (relative), or a Farkas vector whose gap
(see :mod:`.certificate`) is at least 1e-9 on the *original* problem.
Anything else is ``numerical_failure``.

The backend is chosen by argument or by the ``LOSRCERT_LP_BACKEND``
environment variable: ``simplex`` (built-in dense Bland simplex), ``highs``
(scipy/HiGHS), ``exact`` (rational simplex) or ``auto`` (default: simplex
while the dense tableau stays small, HiGHS beyond).
"""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .certificate import MIN_GAP, certificate_gap
from .exact import MAX_EXACT_VARS, solve_exact
from .highs import solve_highs
from .presolve import PresolvedLp, presolve
from .problem import LpProblem
from .simplex import BLAND, DANTZIG, solve_dense

log = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"

PRIMAL_RTOL = 1e-8
DENSE_CELL_LIMIT = 60_000
BACKENDS = ("auto", "simplex", "highs", "exact")


@dataclass
class SolverResult:
    status: str
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    iterations: int = 0
    residual: float = np.nan
    gap: float = np.nan
    backend: str = ""
    seconds: float = 0.0
    reduced_shape: tuple[int, int] | None = None
    notes: list[str] = field(default_factory=list)


def default_backend() -> str:
    name = os.environ.get("LOSRCERT_LP_BACKEND", "auto").strip().lower() or "auto"
    if name not in BACKENDS:
        raise ValueError(f"LOSRCERT_LP_BACKEND must be one of {BACKENDS}, got {name!r}")
    return name


def _pick(backend: str, lp: LpProblem) -> str:
    if backend != "auto":
        return backend
    cells = (lp.n_rows + 1) * (lp.n_vars + lp.n_rows + 1)
    return "simplex" if cells <= DENSE_CELL_LIMIT else "highs"


def _raw_solve(lp: LpProblem, backend: str, pivot_rule: str):
    if backend == "simplex":
        rule = BLAND if pivot_rule == "bland" else DANTZIG
        return solve_dense(lp.A.toarray(), lp.b, rule=rule)
    if backend == "highs":
        return solve_highs(lp.A, lp.b)
    if backend == "exact":
        if lp.n_vars > MAX_EXACT_VARS:
            raise ValueError(
                f"exact backend handles at most {MAX_EXACT_VARS} variables (got {lp.n_vars})"
            )
        return solve_exact(lp.A.toarray(), lp.b)
    raise ValueError(f"unknown backend {backend!r}")


def solve_feasibility(
    lp: LpProblem,
    backend: str | None = None,
    use_presolve: bool = True,
    pivot_rule: str = "bland",
    min_gap: float = MIN_GAP,
    exact_check: bool = False,
) -> SolverResult:
    """Decide ``exists q >= 0 : A q = b`` and return verified evidence."""
    lp.validate()
    t0 = time.perf_counter()
    backend = backend or default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")

    pre: PresolvedLp | None = presolve(lp) if use_presolve else None
    work = pre.reduced if pre is not None else lp
    chosen = _pick(backend, work)
    raw = _raw_solve(work, chosen, pivot_rule)

    result = SolverResult(
        NUMERICAL_FAILURE,
        iterations=raw.iterations,
        backend=chosen,
        reduced_shape=(work.n_rows, work.n_vars),
    )
    scale = max(1.0, float(np.max(np.abs(lp.b)))) if lp.n_rows else 1.0
    if raw.status == "feasible":
        z = np.asarray(raw.x, dtype=float)
        q = pre.primal(z) if pre is not None else z
        res = lp.residual(q)
        result.residual = res
        if res <= PRIMAL_RTOL * scale:
            result.status = FEASIBLE
            result.primal = np.maximum(q, 0.0)
        else:
            result.notes.append(f"primal residual {res:.3g} above tolerance")
    elif raw.status == "infeasible":
        yr = np.asarray(raw.y, dtype=float)
        y = pre.dual(yr) if pre is not None else yr
        # normalise so certificates are comparable across backends
        norm = np.max(np.abs(y)) if y.size else 0.0
        if norm > 0:
            y = y / norm
        gap = certificate_gap(lp, y, exact=exact_check)
        result.gap = float(gap)
        if gap >= min_gap:
            result.status = INFEASIBLE
            result.dual = y
        else:
            result.notes.append(f"certificate gap {float(gap):.3g} below {min_gap}")
    else:
        result.notes.append(f"backend stopped with status {raw.status}")
    result.seconds = time.perf_counter() - t0
    log.debug("solve %s -> %s in %.3fs", chosen, result.status, result.seconds)
    return result
