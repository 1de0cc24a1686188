"""Canonical behaviors: the GHZ strategy, the score-12 box, noisy GHZ and a classical oracle."""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import qstate
from .behavior import Behavior, BehaviorError, Party, deterministic, from_function, is_nonsignalling, mix
from .games import CHSH_TERMS, SAME_WEIGHT, ghz3_score
from .lpsolve.exact import solve_exact
from .qstate import BinaryObservable, QuantumState

log = logging.getLogger(__name__)

PARTIES_3 = (Party("A", 2), Party("B", 3), Party("C", 2))
MAX_N = 12


@dataclass(frozen=True)
class QuantumStrategy:
    state: QuantumState
    measurements: tuple  # per party, per input
    names: tuple

    def __post_init__(self):
        if len(self.measurements) != len(self.names):
            raise ValueError("one measurement list per party")
        dims = [m[0].dimension for m in self.measurements if m]
        if len(dims) != len(self.names) or int(np.prod(dims)) != self.state.dimension:
            raise ValueError("measurement dimensions do not match the state")

    def behavior(self) -> Behavior:
        return qstate.born_behavior(self.state, self.measurements, self.names)

    def with_state(self, state: QuantumState) -> "QuantumStrategy":
        return QuantumStrategy(state, self.measurements, self.names)

    def to_json_dict(self) -> dict:
        data = self.state.data
        if self.state.is_pure:
            st = {"amplitudes": [[float(v.real), float(v.imag)] for v in data]}
        else:
            st = {"density": [[[float(v.real), float(v.imag)] for v in row] for row in data]}
        return {
            "state": st,
            "parties": [
                {"name": n, "bloch": [[float(c) for c in o.bloch_vector()] for o in ms]}
                for n, ms in zip(self.names, self.measurements)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "QuantumStrategy":
        st = data["state"]
        if "amplitudes" in st:
            arr = np.array([complex(re, im) for re, im in st["amplitudes"]])
        else:
            arr = np.array([[complex(re, im) for re, im in row] for row in st["density"]])
        meas = tuple(
            tuple(BinaryObservable.from_bloch(v) for v in p["bloch"]) for p in data["parties"]
        )
        names = tuple(p["name"] for p in data["parties"])
        return cls(QuantumState(arr), meas, names)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Fixed +-1 answers, ``outputs[p][x]`` for party ``p`` on input ``x``."""

    outputs: tuple

    def __post_init__(self):
        for row in self.outputs:
            if any(v not in (1, -1) for v in row):
                raise ValueError(f"deterministic outputs must be +-1, got {row}")

    def behavior(self, parties: Sequence[Party] = PARTIES_3, exact: bool = False) -> Behavior:
        if [len(r) for r in self.outputs] != [p.n_inputs for p in parties]:
            raise ValueError("one output per input is required")
        return deterministic(parties, self.outputs, exact=exact)


def _ghz_observables():
    s = np.pi / 4
    alice = (qstate.rectilinear(), qstate.hadamard())
    bob = (
        BinaryObservable.xz_angle(s),
        BinaryObservable.xz_angle(-s),
        qstate.rectilinear(),
    )
    charlie = (qstate.rectilinear(), qstate.hadamard())
    return alice, bob, charlie


def ghz_quantum_strategy() -> QuantumStrategy:
    """GHZ state; rectilinear on the consistency inputs, Hadamard for Charlie's input 1.

    Alice's input 0 is Z, which is both a CHSH-optimal setting for the steered
    |phi+> (paired with Bob at +-45 degrees in the x-z plane) and the
    rectilinear setting the consistency game asks for.
    """
    a, b, c = _ghz_observables()
    return QuantumStrategy(qstate.ghz_state(3), (a, b, c), ("A", "B", "C"))


def ghz_behavior() -> Behavior:
    return ghz_quantum_strategy().behavior()


def noisy_ghz_behavior(f: float) -> Behavior:
    if not 0.0 <= float(f) <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")
    strat = ghz_quantum_strategy()
    return strat.with_state(qstate.white_noise_mix(strat.state, float(f))).behavior()


def ghz_n_behavior(n: int) -> Behavior:
    """The N-party version: A and B as in the tripartite strategy, every other party like C."""
    if not 3 <= n <= MAX_N:
        raise ValueError(f"n must be between 3 and {MAX_N}, got {n}")
    a, b, c = _ghz_observables()
    names = ("A", "B", "C") if n == 3 else ("A", "B") + tuple(f"C{k}" for k in range(1, n - 1))
    meas = (a, b) + (c,) * (n - 2)
    return qstate.born_behavior(qstate.ghz_state(n), meas, names)


# -- the score-12 box -----------------------------------------------------------

def _bob_literal(x, y, z):
    return (x * y) % 2


def _bob_z_gated(x, y, z):
    # the x.y twist only acts in the CHSH block, where Charlie asks with z=1
    return z * ((x * y) % 2)


NS_BOX_READINGS: tuple[tuple[str, Callable], ...] = (
    ("literal", _bob_literal),
    ("z-gated", _bob_z_gated),
)


@dataclass
class BoxReading:
    name: str
    behavior: Behavior | None
    nonsignalling: bool
    combined: object
    same_correlators: tuple
    accepted: bool
    reason: str = ""


def _box_from_reading(bob_term, exact: bool) -> Behavior:
    quarter = Fraction(1, 4) if exact else 0.25
    zero = Fraction(0) if exact else 0.0

    def fn(ctx, outs):
        x, y, z = ctx
        total = zero
        for r0, r1 in itertools.product((0, 1), repeat=2):
            a = r0 ^ (r1 * x)
            b = r0 ^ bob_term(x, y, z)
            c = (r0, r1)[z]
            want = tuple(1 - 2 * bit for bit in (a, b, c))
            if want == outs:
                total += quarter
        return total

    return from_function(PARTIES_3, fn, exact=exact)


def examine_box_readings(exact: bool = True) -> list[BoxReading]:
    """Build every candidate reading of Bob's response and check the three requirements."""
    from .behavior import correlator

    out = []
    for name, term in NS_BOX_READINGS:
        beh = _box_from_reading(term, exact)
        rep = is_nonsignalling(beh, tol=0 if exact else 1e-12)
        if not rep.is_nonsignalling:
            out.append(BoxReading(name, beh, False, None, (), False, f"signals by {rep.max_violation}"))
            continue
        score = ghz3_score(beh)
        same = (correlator(beh, {"A": 0, "B": 2}), correlator(beh, {"B": 2, "C": 0}))
        ok = score.combined == 12 and all(v == 1 for v in same)
        reason = "" if ok else f"combined={score.combined}, same correlators={same}"
        out.append(BoxReading(name, beh, True, score.combined, same, ok, reason))
    return out


def ns_box_behavior(exact: bool = True) -> Behavior:
    """Average over uniform bits r0, r1 of A_x = r0+r1.x, B_y = r0+[x.y], C_z = r_z (mod 2).

    The first reading of Bob's term that is nonsignalling, scores 12 and has
    both consistency correlators equal to 1 is used; see ``NS_BOX_READINGS``.
    """
    readings = examine_box_readings(exact)
    for r in readings:
        if r.accepted:
            return r.behavior
        log.debug("box reading %s rejected: %s", r.name, r.reason)
    raise BehaviorError(
        "no reading of the box formula is admissible: "
        + "; ".join(f"{r.name}: {r.reason}" for r in readings)
    )


# -- classical oracle -----------------------------------------------------------

def all_deterministic_strategies(n_inputs: Sequence[int] = (2, 3, 2)) -> list[DeterministicStrategy]:
    per_party = [list(itertools.product((1, -1), repeat=k)) for k in n_inputs]
    return [DeterministicStrategy(tuple(combo)) for combo in itertools.product(*per_party)]


def linearized_terms(s: DeterministicStrategy, include_bell: bool = True):
    """(objective, <C_1>) of one deterministic strategy.

    The conditioned correlator uses E[A_x B_y (1 + C_1)], which equals
    <A_x B_y>_{C_1=+1} whenever P(C_1 = +1) = 1/2.
    """
    a, b, c = s.outputs
    bell = sum(sg * a[x] * b[y] * (1 + c[1]) for x, y, sg in CHSH_TERMS) if include_bell else 0
    same = a[0] * b[2] + b[2] * c[0]
    return bell + SAME_WEIGHT * same, c[1]


@dataclass
class ClassicalOptimum:
    status: str  # "optimal" or "infeasible"
    value: Fraction | None
    weights: dict = field(default_factory=dict)  # DeterministicStrategy -> Fraction

    def behavior(self, exact: bool = False) -> Behavior:
        if not self.weights:
            raise ValueError("no achieving mixture")
        strats = list(self.weights)
        ws = [self.weights[s] if exact else float(self.weights[s]) for s in strats]
        return mix([s.behavior(exact=exact) for s in strats], ws)


def classical_max_oracle(
    require_c1_zero: bool = True,
    include_bell: bool = True,
    strategy_filter: Callable[[DeterministicStrategy], bool] | None = None,
) -> ClassicalOptimum:
    """Maximize the linearized combined score over mixtures of deterministic strategies.

    Solved exactly with the rational simplex, so the optimum is a Fraction.
    """
    strats = all_deterministic_strategies()
    if strategy_filter is not None:
        strats = [s for s in strats if strategy_filter(s)]
    if not strats:
        return ClassicalOptimum("infeasible", None)
    obj, c1 = zip(*(linearized_terms(s, include_bell) for s in strats))
    rows = [[1] * len(strats)]
    rhs = [1]
    if require_c1_zero:
        rows.append(list(c1))
        rhs.append(0)
    res = solve_exact(np.array(rows, dtype=object), np.array(rhs, dtype=object), c=[-v for v in obj])
    if res.status == "infeasible":
        return ClassicalOptimum("infeasible", None)
    if res.status != "feasible":
        raise RuntimeError(f"classical oracle LP ended with {res.status}")
    weights = {s: w for s, w in zip(strats, res.x) if w != 0}
    return ClassicalOptimum("optimal", -res.objective, weights)


def classical_opt_behavior(exact: bool = False) -> Behavior:
    return classical_max_oracle().behavior(exact=exact)


def random_classical_behavior(rng: np.random.Generator, n_components: int = 4) -> Behavior:
    """Random mixture of deterministic strategies with Dirichlet weights."""
    strats = all_deterministic_strategies()
    picks = rng.choice(len(strats), size=n_components, replace=False)
    ws = rng.dirichlet(np.ones(n_components))
    return mix([strats[i].behavior() for i in picks], list(ws))


def random_qubit_strategy(rng: np.random.Generator, n_inputs: Sequence[int] = (2, 3, 2)) -> QuantumStrategy:
    """Haar-ish random 3-qubit pure state with random projective qubit measurements."""
    k = len(n_inputs)
    d = 2**k
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    meas = []
    for n in n_inputs:
        obs = []
        for _ in range(n):
            v = rng.normal(size=3)
            obs.append(BinaryObservable.from_bloch(v / np.linalg.norm(v)))
        meas.append(tuple(obs))
    names = tuple(chr(ord("A") + i) for i in range(k))
    return QuantumStrategy(QuantumState(psi), tuple(meas), names)
