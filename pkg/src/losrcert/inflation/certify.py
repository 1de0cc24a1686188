"""Certification runs and noise-threshold bisection."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..behavior import Behavior
from ..games import CLASSICAL_BOUND, ghz3_score
from ..lpsolve.certificate import MIN_GAP, validate_certificate
from ..lpsolve.problem import LpProblem
from ..lpsolve.solve import FEASIBLE, INFEASIBLE, NUMERICAL_FAILURE, solve_feasibility
from .assemble import AssemblyOptions, assemble_lp, default_restriction
from .graph import InflationGraph, build_cut_inflation, build_ring_inflation

log = logging.getLogger(__name__)

WIRINGS = ("auto", "ring", "cut")

# constraint sets of the perfect-correlation versus PR-monogamy argument on the cut
CONTRADICTION_SETS = (("A1", "B1", "C1"), ("A2", "B2"), ("B2", "C2"), ("A1", "C2"), ("A2", "C2"))


@dataclass
class CertifyConfig:
    order: int = 3
    wiring: str = "auto"
    rings: tuple | None = None
    full_contexts: bool = False
    constraint_sets: tuple | None = None
    max_set_size: int = 3
    backend: str | None = None
    presolve: bool = True
    exact_check: bool = False

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "wiring": self.wiring,
            "rings": list(self.rings) if self.rings else None,
            "full_contexts": self.full_contexts,
            "constraint_sets": [list(s) for s in self.constraint_sets] if self.constraint_sets else None,
            "max_set_size": self.max_set_size,
            "backend": self.backend,
            "presolve": self.presolve,
            "exact_check": self.exact_check,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertifyConfig":
        d = dict(d)
        if d.get("rings"):
            d["rings"] = tuple(d["rings"])
        if d.get("constraint_sets"):
            d["constraint_sets"] = tuple(tuple(s) for s in d["constraint_sets"])
        return cls(**d)


def build_graph(config: CertifyConfig) -> InflationGraph:
    """Order 2 defaults to the cut (a bare hexagon has no triangle to pin the
    conditioned game to); order 3 defaults to the triangle-plus-hexagon ring."""
    if config.wiring not in WIRINGS:
        raise ValueError(f"wiring must be one of {WIRINGS}")
    wiring = config.wiring
    if wiring == "auto":
        wiring = "cut" if config.order == 2 else "ring"
    if wiring == "cut":
        if config.order not in (2, 3):
            raise ValueError("the cut inflation exists for orders 2 and 3")
        return build_cut_inflation()
    return build_ring_inflation(config.order, config.rings)


@dataclass
class FeasibilityOutcome:
    verdict: str
    witness: np.ndarray | None = None
    certificate: np.ndarray | None = None
    certificate_gap: float = float("nan")
    lp: LpProblem | None = None
    graph: str = ""
    backend: str = ""
    seconds: float = 0.0
    lp_shape: tuple = ()
    reduced_shape: tuple | None = None
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "certificate_gap": None if np.isnan(self.certificate_gap) else self.certificate_gap,
            "graph": self.graph,
            "backend": self.backend,
            "seconds": round(self.seconds, 4),
            "lp_shape": list(self.lp_shape),
            "reduced_shape": list(self.reduced_shape) if self.reduced_shape else None,
            "notes": list(self.notes),
        }


def certify(target: Behavior, config: CertifyConfig | None = None) -> FeasibilityOutcome:
    """Infeasible means no bipartite-source model with shared randomness exists.

    Feasible is inconclusive: the LP is only a relaxation.
    """
    config = config or CertifyConfig()
    t0 = time.perf_counter()
    graph = build_graph(config)
    restriction = default_restriction(graph, full=config.full_contexts)
    opts = AssemblyOptions(max_set_size=config.max_set_size, constraint_sets=config.constraint_sets)
    lp = assemble_lp(graph, target, restriction, opts)
    res = solve_feasibility(lp, backend=config.backend, use_presolve=config.presolve, exact_check=config.exact_check)
    out = FeasibilityOutcome(
        verdict=res.status,
        lp=lp,
        graph=graph.name,
        backend=res.backend,
        lp_shape=(lp.n_rows, lp.n_vars),
        reduced_shape=res.reduced_shape,
        notes=list(res.notes),
    )
    if res.status == FEASIBLE:
        out.witness = res.primal
    elif res.status == INFEASIBLE:
        # re-check with the public validator before reporting
        if validate_certificate(lp, res.dual, MIN_GAP, exact=config.exact_check):
            out.certificate = res.dual
            out.certificate_gap = res.gap
        else:
            out.verdict = NUMERICAL_FAILURE
            out.notes.append("certificate failed independent validation")
    out.seconds = time.perf_counter() - t0
    log.info("certify %s on %s: %s (%.2fs)", graph.name, lp.n_vars, out.verdict, out.seconds)
    return out


# -- thresholds ---------------------------------------------------------------------

class BisectionError(ValueError):
    pass


@dataclass
class BisectionResult:
    threshold: float
    lo: float
    hi: float
    evaluations: list  # (f, verdict)
    monotone: bool
    issues: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "bracket": [self.lo, self.hi],
            "monotone": self.monotone,
            "issues": list(self.issues),
            "evaluations": [[f, v] for f, v in self.evaluations],
        }


def lp_decider(config: CertifyConfig) -> Callable[[Behavior], str]:
    return lambda beh: certify(beh, config).verdict


def inequality_decider(beh: Behavior) -> str:
    """``infeasible`` when the combined score beats the classical bound of 10."""
    return INFEASIBLE if ghz3_score(beh).violates_bound else FEASIBLE


def monotone_verdicts(points: Sequence[tuple]) -> bool:
    """Verdicts sorted by f must never go from infeasible back to feasible."""
    seen_infeasible = False
    for _, v in sorted(points):
        if v == INFEASIBLE:
            seen_infeasible = True
        elif v == FEASIBLE and seen_infeasible:
            return False
    return True


def threshold_bisect(
    family: Callable[[float], Behavior],
    decide: Callable[[Behavior], str] | CertifyConfig,
    precision: float = 1e-3,
    lo: float = 0.0,
    hi: float = 1.0,
    probes: Sequence[float] = (),
) -> BisectionResult:
    """Smallest f at which ``decide(family(f))`` is infeasible, to within ``precision``.

    Feasible behaviors form a convex set, so along a noise segment the verdict
    can switch only once. Any evaluation breaking that pattern, and any
    numerical failure, is recorded in ``issues``; failures count as
    feasible so the reported threshold never overstates the LP.
    """
    if isinstance(decide, CertifyConfig):
        decide = lp_decider(decide)
    if not precision > 0:
        raise BisectionError("precision must be positive")
    evals: list = []
    issues: list = []

    def run(f):
        v = decide(family(f))
        evals.append((f, v))
        if v not in (FEASIBLE, INFEASIBLE):
            issues.append(f"{v} at f={f:.6g}")
        return v == INFEASIBLE

    if run(lo):
        raise BisectionError(f"family is already infeasible at f={lo}")
    if not run(hi):
        raise BisectionError(f"family is feasible at f={hi}; nothing to bisect")
    for f in probes:
        run(float(f))
    a, b = lo, hi
    while b - a > precision:
        mid = 0.5 * (a + b)
        if run(mid):
            b = mid
        else:
            a = mid
    mono = monotone_verdicts([(f, v) for f, v in evals if v in (FEASIBLE, INFEASIBLE)])
    if not mono:
        issues.append("verdicts are not monotone in f")
    return BisectionResult(b, a, b, sorted(evals), mono, issues)


def inequality_threshold() -> float:
    """Closed form of the fidelity at which the GHZ score crosses the bound."""
    return CLASSICAL_BOUND / (8 + 2 * np.sqrt(2))
