"""Nonfanout inflations of the triangle with bipartite sources and global randomness.

Source types are named after the pair they connect: ``alpha`` feeds B and C,
``beta`` feeds C and A, ``gamma`` feeds A and B. The global randomness is
connected to every inflated party and never needs explicit copies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

PARTY_TYPES = ("A", "B", "C")
SOURCES_OF = {"A": ("beta", "gamma"), "B": ("gamma", "alpha"), "C": ("alpha", "beta")}
ENDPOINTS = {"alpha": ("B", "C"), "beta": ("C", "A"), "gamma": ("A", "B")}
SUPPORTED_ORDERS = (2, 3)


class InflationError(ValueError):
    pass


@dataclass(frozen=True)
class InflatedParty:
    kind: str  # A, B or C
    copy: int
    sources: tuple  # ((source_type, copy), (source_type, copy)) in SOURCES_OF order

    @property
    def name(self) -> str:
        return f"{self.kind}{self.copy}"

    def source(self, stype: str) -> int | None:
        for t, k in self.sources:
            if t == stype:
                return k
        return None


@dataclass(frozen=True)
class InjectableSet:
    parties: tuple  # indices into graph.parties
    image: tuple  # original party types, aligned with ``parties``
    environment: tuple  # canonical shared-source pattern of the subset


@dataclass
class InflationGraph:
    name: str
    parties: tuple
    source_copies: dict
    global_randomness: bool = True
    automorphisms: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()
        if not self.automorphisms:
            self.automorphisms = wiring_automorphisms(self)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def names(self) -> tuple:
        return tuple(p.name for p in self.parties)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InflationError(f"no inflated party {name!r}") from None

    def validate(self):
        names = self.names
        if len(set(names)) != len(names):
            raise InflationError("duplicate inflated parties")
        fed: dict = {}
        for p in self.parties:
            if p.kind not in PARTY_TYPES:
                raise InflationError(f"unknown party type {p.kind}")
            types = tuple(t for t, _ in p.sources)
            if types != SOURCES_OF[p.kind]:
                raise InflationError(f"{p.name} must receive exactly one copy of {SOURCES_OF[p.kind]}")
            for t, k in p.sources:
                if not 1 <= k <= self.source_copies.get(t, 0):
                    raise InflationError(f"{p.name} uses missing source copy {t}{k}")
                fed.setdefault((t, k), []).append(p.kind)
        for (t, k), kinds in fed.items():
            # nonfanout: one copy reaches at most one party of each endpoint type
            if len(kinds) != len(set(kinds)) or not set(kinds) <= set(ENDPOINTS[t]):
                raise InflationError(f"source copy {t}{k} is fanned out to {kinds}")
        if not self.global_randomness:
            raise InflationError("global randomness must reach every party")

    def shared_source(self, i: int, j: int) -> str | None:
        si = set(self.parties[i].sources)
        for s in self.parties[j].sources:
            if s in si:
                return s[0]
        return None

    def adjacency(self) -> dict:
        adj = {i: set() for i in range(self.n_parties)}
        for i, j in itertools.combinations(range(self.n_parties), 2):
            if self.shared_source(i, j):
                adj[i].add(j)
                adj[j].add(i)
        return adj

    def apply(self, perm: Sequence[int], items: Sequence) -> tuple:
        """Move ``items[p]`` to position ``perm[p]``."""
        out = [None] * len(items)
        for p, v in enumerate(items):
            out[perm[p]] = v
        return tuple(out)

    def relabel(self, order: Sequence[int]) -> "InflationGraph":
        """Same inflation with parties listed as ``parties[order[0]], parties[order[1]], ...``."""
        return InflationGraph(self.name, tuple(self.parties[i] for i in order), dict(self.source_copies))


def _party(kind: str, copy: int, **src) -> InflatedParty:
    return InflatedParty(kind, copy, tuple((t, src[t]) for t in SOURCES_OF[kind]))


def _ring_parties(rings: Sequence[int]) -> list:
    parties = []
    start = 1
    for length in rings:
        copies = list(range(start, start + length))
        for pos, k in enumerate(copies):
            nxt = copies[(pos + 1) % length]
            parties += [
                _party("A", k, beta=k, gamma=k),
                _party("B", k, gamma=k, alpha=k),
                _party("C", k, alpha=k, beta=nxt),
            ]
        start += length
    return parties


def build_ring_inflation(order: int, rings: Sequence[int] | None = None) -> InflationGraph:
    """Ring inflation with ``order`` copies of every source and party.

    Each ring of length L closes a cycle of 3L parties; a ring of length 1 is
    a copy of the original triangle. Defaults: one hexagon for order 2, a
    triangle plus a hexagon for order 3.
    """
    if order not in SUPPORTED_ORDERS:
        raise InflationError(f"inflation order must be one of {SUPPORTED_ORDERS}, got {order}")
    if rings is None:
        rings = (2,) if order == 2 else (1, 2)
    rings = tuple(int(r) for r in rings)
    if sum(rings) != order or any(r < 1 for r in rings):
        raise InflationError(f"ring lengths {rings} must be positive and add up to {order}")
    parties = _ring_parties(rings)
    name = "ring-" + "+".join(str(3 * r) for r in rings)
    return InflationGraph(name, tuple(parties), {t: order for t in ENDPOINTS})


def build_cut_inflation() -> InflationGraph:
    """The triangle-plus-hexagon inflation with the third copies of A, B, C removed.

    What is left is the original triangle next to the open chain A2-B2-C2;
    C2 holds the copy of beta that would have gone to A3.
    """
    full = build_ring_inflation(3)
    kept = tuple(p for p in full.parties if p.copy <= 2)
    return InflationGraph("cut-3", kept, dict(full.source_copies))


# -- automorphisms ----------------------------------------------------------------

def _source_map(graph: InflationGraph, perm: Sequence[int]) -> dict | None:
    """Induced map on source copies, or None if the party map does not preserve wiring."""
    smap: dict = {}
    used: dict = {}
    for p, q in enumerate(perm):
        a, b = graph.parties[p], graph.parties[q]
        if a.kind != b.kind:
            return None
        for s, t in zip(a.sources, b.sources):
            if smap.setdefault(s, t) != t or used.setdefault(t, s) != s:
                return None
    return smap


def _search(n, adj, allowed, check):
    """Backtracking over adjacency-preserving permutations."""
    found = []
    perm = [-1] * n
    taken = [False] * n

    def rec(i):
        if i == n:
            if check(perm):
                found.append(tuple(perm))
            return
        for cand in allowed(i):
            if taken[cand]:
                continue
            if any((j in adj[i]) != (perm[j] in adj[cand]) for j in range(i)):
                continue
            perm[i] = cand
            taken[cand] = True
            rec(i + 1)
            taken[cand] = False
        perm[i] = -1

    rec(0)
    return found


def wiring_automorphisms(graph: InflationGraph) -> list:
    """Type-preserving party permutations induced by relabelling source copies."""
    adj = graph.adjacency()
    n = graph.n_parties
    by_kind = {k: [i for i, p in enumerate(graph.parties) if p.kind == k] for k in PARTY_TYPES}
    return _search(
        n,
        adj,
        lambda i: by_kind[graph.parties[i].kind],
        lambda perm: _source_map(graph, perm) is not None,
    )


def ring_symmetries(graph: InflationGraph) -> list:
    """All symmetries of the party adjacency graph, ignoring party types.

    For a ring this is the dihedral group of each cycle (times permutations of
    equal rings); only the type-preserving subgroup acts on the statistics.
    """
    adj = graph.adjacency()
    n = graph.n_parties
    return _search(n, adj, lambda i: range(n), lambda perm: True)


# -- environments and injectable sets ---------------------------------------------

def environment_form(graph: InflationGraph, subset: Sequence[int]):
    """Canonical shared-source pattern of ``subset`` and the party order achieving it.

    Two subsets have type-preservingly isomorphic environments exactly when
    their forms agree; matching positions of the returned orders correspond.
    """
    subset = tuple(subset)
    kinds = sorted(graph.parties[i].kind for i in subset)
    groups = [[i for i in subset if graph.parties[i].kind == k] for k in PARTY_TYPES]
    best = None
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = tuple(i for g in choice for i in g)
        pairs = tuple(
            (a, b, graph.shared_source(order[a], order[b]) or "")
            for a, b in itertools.combinations(range(len(order)), 2)
        )
        key = (tuple(kinds), pairs)
        if best is None or key < best[0]:
            best = (key, order)
    return best


def _original_form(kinds: Sequence[str]):
    kinds = sorted(kinds)
    pairs = []
    for a, b in itertools.combinations(range(len(kinds)), 2):
        shared = set(SOURCES_OF[kinds[a]]) & set(SOURCES_OF[kinds[b]])
        pairs.append((a, b, shared.pop()))
    return (tuple(kinds), tuple(pairs))


def injectable_sets(graph: InflationGraph, max_size: int = 3) -> list:
    """Subsets whose environment matches the same parties of the original triangle."""
    if max_size < 1:
        raise InflationError("max_size must be at least 1")
    out = []
    for size in range(1, min(max_size, 3) + 1):
        for subset in itertools.combinations(range(graph.n_parties), size):
            kinds = [graph.parties[i].kind for i in subset]
            if len(set(kinds)) != size:
                continue
            form, order = environment_form(graph, subset)
            if form == _original_form(kinds):
                out.append(InjectableSet(order, tuple(graph.parties[i].kind for i in order), form))
    return out


def environment_classes(graph: InflationGraph, max_size: int = 3) -> list:
    """Groups of subsets (as canonically ordered tuples) with isomorphic environments.

    Only classes with at least two members are returned.
    """
    classes: dict = {}
    for size in range(1, max_size + 1):
        for subset in itertools.combinations(range(graph.n_parties), size):
            form, order = environment_form(graph, subset)
            classes.setdefault(form, []).append(order)
    return [(form, members) for form, members in classes.items() if len(members) > 1]


def is_injectable_form(form) -> bool:
    kinds = form[0]
    return len(set(kinds)) == len(kinds) and form == _original_form(kinds)
