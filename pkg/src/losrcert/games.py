"""Scores of the conditioned CHSH game, the consistency game and their combination."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .behavior import Behavior, BehaviorError, condition, correlator

CLASSICAL_BOUND = 10
ALGEBRAIC_MAX = 12
SAME_WEIGHT = 4
C1_TOL = 1e-6

# (x, y, sign) terms of the CHSH expression
CHSH_TERMS = ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, -1))


@dataclass(frozen=True)
class Ghz3Score:
    bell_conditional: object
    same: object
    c1_marginal: object
    combined: object
    assumption_satisfied: bool
    tolerance: float

    @property
    def violates_bound(self) -> bool:
        """True when the combined score exceeds 10 while <C_1> = 0 holds."""
        return self.assumption_satisfied and float(self.combined) > CLASSICAL_BOUND

    def as_dict(self) -> dict:
        return {
            "bell_conditional": float(self.bell_conditional),
            "same": float(self.same),
            "c1_marginal": float(self.c1_marginal),
            "combined": float(self.combined),
            "combined_exact": str(self.combined),
            "assumption_satisfied": self.assumption_satisfied,
            "violates_bound": self.violates_bound,
        }


def _require_inputs(behavior: Behavior, needs: dict):
    for name, n in needs.items():
        idx = behavior.index(name)
        if behavior.parties[idx].n_inputs < n:
            raise BehaviorError(f"party {name} needs at least {n} inputs")


def chsh_conditional(
    behavior: Behavior,
    conditioning: Sequence[tuple[str, int, int]] = (("C", 1, 1),),
    alice: str = "A",
    bob: str = "B",
):
    """CHSH value of Alice and Bob once every ``(party, input, output)`` event holds.

    The default conditions on Charlie giving +1 on input 1. Conditioning on
    several parties (the N-partite analogue) applies the events in turn.
    """
    _require_inputs(behavior, {alice: 2, bob: 2})
    for party, _, _ in conditioning:
        behavior.index(party)
    cond = behavior
    for party, x, out in conditioning:
        cond = condition(cond, party, x, out)
    return sum(s * correlator(cond, {alice: x, bob: y}) for x, y, s in CHSH_TERMS)


def i_same(behavior: Behavior):
    """<A_0 B_2> + <B_2 C_0>."""
    _require_inputs(behavior, {"A": 1, "B": 3, "C": 1})
    return correlator(behavior, {"A": 0, "B": 2}) + correlator(behavior, {"B": 2, "C": 0})


def ghz3_score(behavior: Behavior, tol: float = C1_TOL) -> Ghz3Score:
    _require_inputs(behavior, {"A": 2, "B": 3, "C": 2})
    bell = chsh_conditional(behavior)
    same = i_same(behavior)
    c1 = correlator(behavior, {"C": 1})
    return Ghz3Score(
        bell_conditional=bell,
        same=same,
        c1_marginal=c1,
        combined=bell + SAME_WEIGHT * same,
        assumption_satisfied=abs(float(c1)) <= tol,
        tolerance=tol,
    )
