"""Conditional distributions P(outputs | inputs) with binary +-1 outputs.

A :class:`Behavior` stores a dense table of shape
``(n_in_1, ..., n_in_k, 2, ..., 2)``: the input axes of every party followed by
the output axes. Output index 0 stands for +1 and index 1 for -1.

Tables may hold floats or, for exact work, :class:`fractions.Fraction`
objects (``dtype=object``); every operation here is written to handle both.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

NS_TOL = 1e-8
SUM_TOL = 1e-9
DEGENERATE_TOL = 1e-9
OUTPUT_VALUES = (1, -1)


class BehaviorError(ValueError):
    pass


class SignallingError(BehaviorError):
    """Raised when a marginal would depend on the inputs of discarded parties."""


class DegenerateConditioningError(BehaviorError):
    pass


@dataclass(frozen=True)
class Party:
    name: str
    n_inputs: int


def output_index(value: int) -> int:
    if value == 1:
        return 0
    if value == -1:
        return 1
    raise BehaviorError(f"outputs are +1 or -1, got {value!r}")


class Behavior:
    """A family of conditional distributions, one per input context."""

    def __init__(self, parties: Sequence[Party], table, *, check: bool = True):
        self.parties = tuple(parties)
        names = [p.name for p in self.parties]
        if len(set(names)) != len(names):
            raise BehaviorError(f"duplicate party names {names}")
        arr = np.asarray(table)
        if arr.dtype != object:
            arr = np.array(arr, dtype=float)
        else:
            arr = arr.copy()
        k = len(self.parties)
        expected = tuple(p.n_inputs for p in self.parties) + (2,) * k
        if arr.shape != expected:
            raise BehaviorError(f"table shape {arr.shape} does not match parties {expected}")
        arr.setflags(write=False)
        self.table = arr
        if check:
            self._validate()

    def _validate(self):
        k = self.n_parties
        if self.exact:
            if any(v < 0 for v in self.table.flat):
                raise BehaviorError("negative probability")
            sums = self.table.sum(axis=tuple(range(k, 2 * k)))
            if any(s != 1 for s in np.ravel(sums)):
                raise BehaviorError("exact context sums differ from 1")
            return
        if self.table.size and self.table.min() < 0:
            raise BehaviorError(f"negative probability {self.table.min():.3g}")
        sums = self.table.sum(axis=tuple(range(k, 2 * k)))
        dev = np.max(np.abs(sums - 1.0)) if sums.size else 0.0
        if dev > SUM_TOL:
            raise BehaviorError(f"context sums deviate from 1 by {dev:.3g}")

    # -- basic accessors ---------------------------------------------------
    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    @property
    def n_inputs(self) -> tuple[int, ...]:
        return tuple(p.n_inputs for p in self.parties)

    @property
    def exact(self) -> bool:
        return self.table.dtype == object

    def index(self, party) -> int:
        if isinstance(party, (int, np.integer)):
            if not 0 <= party < self.n_parties:
                raise BehaviorError(f"party index {party} out of range")
            return int(party)
        try:
            return self.names.index(party)
        except ValueError:
            raise BehaviorError(f"unknown party {party!r}; have {self.names}") from None

    def prob(self, outputs: Sequence[int], inputs: Sequence[int]):
        """P(outputs | inputs) with outputs given as +-1 values."""
        idx = tuple(inputs) + tuple(output_index(o) for o in outputs)
        return self.table[idx]

    def contexts(self):
        return itertools.product(*(range(n) for n in self.n_inputs))

    def as_float(self) -> "Behavior":
        if not self.exact:
            return self
        return Behavior(self.parties, self.table.astype(float), check=False)

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        return f"Behavior({', '.join(f'{p.name}:{p.n_inputs}' for p in self.parties)}; {kind})"

    def allclose(self, other: "Behavior", atol: float = 1e-10) -> bool:
        if self.parties != other.parties:
            return False
        return bool(np.allclose(self.table.astype(float), other.table.astype(float), atol=atol, rtol=0))


def mix(behaviors: Sequence[Behavior], weights: Sequence) -> Behavior:
    """Entrywise convex combination of behaviors over the same parties."""
    if len(behaviors) != len(weights) or not behaviors:
        raise BehaviorError("need one weight per behavior")
    parties = behaviors[0].parties
    if any(b.parties != parties for b in behaviors):
        raise BehaviorError("cannot mix behaviors over different parties")
    table = sum(w * b.table for w, b in zip(weights, behaviors))
    return Behavior(parties, table)


def _abs_max(arr) -> float:
    arr = np.asarray(arr)
    if arr.size == 0:
        return 0.0
    if arr.dtype == object:
        return float(max(abs(v) for v in arr.flat))
    return float(np.max(np.abs(arr)))


def marginal(behavior: Behavior, parties: Sequence, tol: float = NS_TOL) -> Behavior:
    """Sum out every party not listed in ``parties``.

    Raises :class:`SignallingError` if the retained marginal changes with the
    discarded parties' inputs by more than ``tol``.
    """
    keep = sorted({behavior.index(p) for p in parties})
    if not keep:
        raise BehaviorError("marginal needs at least one retained party")
    k = behavior.n_parties
    drop = [i for i in range(k) if i not in keep]
    t = behavior.table
    if drop:
        t = t.sum(axis=tuple(k + i for i in drop))
        ref = t[tuple(slice(None) if i in keep else slice(0, 1) for i in range(k))]
        dev = _abs_max(t - ref)
        if dev > tol:
            names = [behavior.names[i] for i in drop]
            raise SignallingError(
                f"marginal on {[behavior.names[i] for i in keep]} depends on inputs of "
                f"{names} (deviation {dev:.3g})"
            )
        t = t[tuple(slice(None) if i in keep else 0 for i in range(k))]
    return Behavior([behavior.parties[i] for i in keep], t, check=False)


def condition(behavior: Behavior, party, input: int, output: int) -> Behavior:
    """Bayes-condition on ``party`` producing ``output`` when given ``input``.

    The returned behavior lives on the remaining parties; the conditioning
    event must have probability above 1e-9 in every remaining context.
    """
    p = behavior.index(party)
    k = behavior.n_parties
    if k < 2:
        raise BehaviorError("conditioning needs at least two parties")
    if not 0 <= input < behavior.parties[p].n_inputs:
        raise BehaviorError(f"input {input} out of range for {behavior.names[p]}")
    o = output_index(output)
    sub = np.take(behavior.table, input, axis=p)  # inputs of the rest, then all k outputs
    out_axis = k - 1 + p
    joint = np.take(sub, o, axis=out_axis)
    others = tuple(a for a in range(k - 1, 2 * k - 1) if a != out_axis)
    event = np.take(sub.sum(axis=others), o, axis=-1)
    if event.dtype == object:
        small = any(v < DEGENERATE_TOL for v in np.ravel(event))
    else:
        small = bool(np.any(event < DEGENERATE_TOL))
    if small:
        raise DegenerateConditioningError(
            f"P({behavior.names[p]}={output} | input {input}) is below {DEGENERATE_TOL} in some context"
        )
    event = event.reshape(event.shape + (1,) * (k - 1))
    table = joint / event
    rest = [behavior.parties[i] for i in range(k) if i != p]
    return Behavior(rest, table, check=True)


def correlator(behavior: Behavior, inputs: Mapping, tol: float = NS_TOL):
    """<prod of listed outputs> at the given inputs, e.g. ``{"A": 0, "B": 2}``."""
    if not inputs:
        raise BehaviorError("correlator needs at least one party")
    idxs = [behavior.index(p) for p in inputs]
    if len(set(idxs)) != len(idxs):
        raise BehaviorError("correlator parties must be distinct")
    m = marginal(behavior, idxs, tol=tol)
    by_index = {behavior.index(p): x for p, x in inputs.items()}
    ordered = sorted(by_index)
    ctx = tuple(by_index[i] for i in ordered)
    dist = m.table[ctx]
    total = 0
    for outs in itertools.product((0, 1), repeat=len(ordered)):
        sign = -1 if sum(outs) % 2 else 1
        total = total + sign * dist[outs]
    return total


@dataclass(frozen=True)
class NonsignallingReport:
    is_nonsignalling: bool
    max_violation: float
    worst_party: str | None
    worst_inputs: tuple[int, int] | None
    tolerance: float


def is_nonsignalling(behavior: Behavior, tol: float = NS_TOL) -> NonsignallingReport:
    """Check that no party's input changes the joint marginal of the others."""
    k = behavior.n_parties
    worst = (0.0, None, None)
    t = behavior.table
    for p in range(k):
        n = behavior.parties[p].n_inputs
        if n < 2:
            continue
        rest = t.sum(axis=k + p)
        for i, j in itertools.combinations(range(n), 2):
            dev = _abs_max(np.take(rest, i, axis=p) - np.take(rest, j, axis=p))
            if dev > worst[0]:
                worst = (dev, behavior.names[p], (i, j))
    return NonsignallingReport(
        is_nonsignalling=worst[0] <= tol,
        max_violation=float(worst[0]),
        worst_party=worst[1],
        worst_inputs=worst[2],
        tolerance=tol,
    )


# -- construction helpers ---------------------------------------------------

def from_function(parties: Sequence[Party], fn, exact: bool = False) -> Behavior:
    """Tabulate ``fn(inputs, outputs) -> probability`` with outputs as +-1 tuples."""
    k = len(parties)
    shape = tuple(p.n_inputs for p in parties) + (2,) * k
    table = np.empty(shape, dtype=object if exact else float)
    for ctx in itertools.product(*(range(p.n_inputs) for p in parties)):
        for outs in itertools.product((0, 1), repeat=k):
            table[ctx + outs] = fn(ctx, tuple(OUTPUT_VALUES[o] for o in outs))
    return Behavior(parties, table)


def deterministic(parties: Sequence[Party], responses: Sequence[Sequence[int]], exact: bool = False) -> Behavior:
    """Behavior where party i outputs ``responses[i][x_i]`` (+-1) on input x_i."""
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0

    def fn(ctx, outs):
        ok = all(outs[i] == responses[i][x] for i, x in enumerate(ctx))
        return one if ok else zero

    return from_function(parties, fn, exact=exact)


def uniform(parties: Sequence[Party], exact: bool = False) -> Behavior:
    val = Fraction(1, 2 ** len(parties)) if exact else 0.5 ** len(parties)
    return from_function(parties, lambda c, o: val, exact=exact)


def product(behaviors: Sequence[Behavior]) -> Behavior:
    """Independent composition of behaviors on disjoint parties."""
    parties = [p for b in behaviors for p in b.parties]
    k = len(parties)
    table = None
    for b in behaviors:
        table = b.table if table is None else np.multiply.outer(table, b.table)
    # outer product interleaves (inputs_1, outputs_1, inputs_2, ...); regroup
    axes_in, axes_out, pos = [], [], 0
    for b in behaviors:
        m = b.n_parties
        axes_in.extend(range(pos, pos + m))
        axes_out.extend(range(pos + m, pos + 2 * m))
        pos += 2 * m
    table = np.transpose(table, axes_in + axes_out)
    assert table.ndim == 2 * k
    return Behavior(parties, table)


def reorder(behavior: Behavior, names: Sequence[str]) -> Behavior:
    perm = [behavior.index(n) for n in names]
    if sorted(perm) != list(range(behavior.n_parties)):
        raise BehaviorError("reorder needs a permutation of all parties")
    k = behavior.n_parties
    table = np.transpose(behavior.table, perm + [k + p for p in perm])
    return Behavior([behavior.parties[p] for p in perm], table, check=False)


# -- JSON ---------------------------------------------------------------------

def _fmt(v) -> str:
    return format(float(v), ".17g")


def to_json_dict(behavior: Behavior) -> dict:
    """Serialise with parties sorted by name and probabilities as 17-digit decimals."""
    b = reorder(behavior, sorted(behavior.names))
    k = b.n_parties
    table = {}
    for ctx in b.contexts():
        dist = b.table[ctx].reshape(-1)
        table[",".join(str(x) for x in ctx)] = [_fmt(v) for v in dist]
    return {
        "parties": [{"name": p.name, "n_inputs": p.n_inputs} for p in b.parties],
        "outputs": [-1, 1],
        "table": table,
    }


def from_json_dict(data: Mapping, exact: bool = False) -> Behavior:
    try:
        parties = [Party(str(p["name"]), int(p["n_inputs"])) for p in data["parties"]]
        raw = data["table"]
    except (KeyError, TypeError) as exc:
        raise BehaviorError(f"malformed behavior JSON: {exc}") from None
    k = len(parties)
    shape = tuple(p.n_inputs for p in parties) + (2,) * k
    table = np.empty(shape, dtype=object if exact else float)
    seen = set()
    for key, probs in raw.items():
        try:
            ctx = tuple(int(x) for x in key.split(","))
        except ValueError:
            raise BehaviorError(f"bad context key {key!r}") from None
        if len(ctx) != k or any(not 0 <= x < p.n_inputs for x, p in zip(ctx, parties)):
            raise BehaviorError(f"context {key!r} out of range")
        if len(probs) != 2**k:
            raise BehaviorError(f"context {key!r} needs {2**k} probabilities")
        vals = [Fraction(str(v)) if exact else float(v) for v in probs]
        table[ctx] = np.array(vals, dtype=object if exact else float).reshape((2,) * k)
        seen.add(ctx)
    if len(seen) != int(np.prod([p.n_inputs for p in parties])):
        raise BehaviorError("behavior JSON is missing input contexts")
    return Behavior(parties, table)


def dumps(behavior: Behavior) -> str:
    return json.dumps(to_json_dict(behavior), indent=1)


def loads(text: str, exact: bool = False) -> Behavior:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BehaviorError(f"invalid JSON: {exc}") from None
    return from_json_dict(data, exact=exact)
