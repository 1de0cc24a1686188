"""Linear constraints on the inflated distribution Q(outputs | inputs).

Variables are indexed ``context_index * 2**n + outputs`` where the output
word lists party 0 as its most significant bit and bit 0 means +1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ..behavior import Behavior, BehaviorError, is_nonsignalling, marginal, reorder
from ..lpsolve.problem import LpProblem
from .graph import InflationGraph, environment_classes, injectable_sets, is_injectable_form

N_INPUTS = {"A": 2, "B": 3, "C": 2}
SAME_GAME_INPUT = {"A": 0, "B": 2, "C": 0}
KINDS = ("normalization", "nonsignalling", "symmetry", "injectable", "environment")
_K = {k: i for i, k in enumerate(KINDS)}


class RestrictionError(ValueError):
    pass


def _act(perm: Sequence[int], ctx: tuple) -> tuple:
    out = [0] * len(ctx)
    for p, x in enumerate(ctx):
        out[perm[p]] = x
    return tuple(out)


def close_under(graph: InflationGraph, contexts: Iterable[tuple]) -> list:
    ctxs = set(map(tuple, contexts))
    grown = set(ctxs)
    for g in graph.automorphisms:
        grown |= {_act(g, c) for c in ctxs}
    return sorted(grown)


def default_restriction(graph: InflationGraph, full: bool = False) -> list:
    """Game inputs on the first copies, the consistency inputs elsewhere.

    Copy-1 parties get every input of their type; other copies only the
    input shared with the consistency game (A 0, B 2, C 0). The set is then
    closed under the wiring automorphisms. ``full`` gives every context.
    """
    choices = []
    for p in graph.parties:
        if full or p.copy == 1:
            choices.append(range(N_INPUTS[p.kind]))
        else:
            choices.append((SAME_GAME_INPUT[p.kind],))
    return close_under(graph, itertools.product(*choices))


@dataclass
class AssemblyOptions:
    max_set_size: int = 3
    nonsignalling: bool = True
    constraint_sets: tuple | None = None  # restrict (iii)-(v) to these party-name sets


class _Rows:
    def __init__(self, n_parties: int, n_contexts: int):
        self.n = n_parties
        self.width = 2**n_parties
        self.n_vars = n_contexts * self.width
        self.ri: list = []
        self.ci: list = []
        self.val: list = []
        self.rhs: list = []
        self.kind: list = []
        self._groups: dict = {}

    def groups(self, subset: tuple) -> list:
        """For each output pattern of ``subset``, the output words that restrict to it."""
        g = self._groups.get(subset)
        if g is None:
            words = np.arange(self.width)
            pat = np.zeros(self.width, dtype=np.int64)
            for p in subset:
                pat = pat * 2 + ((words >> (self.n - 1 - p)) & 1)
            order = np.argsort(pat, kind="stable")
            counts = np.bincount(pat, minlength=2 ** len(subset))
            g = np.split(order, np.cumsum(counts)[:-1])
            self._groups[subset] = g
        return g

    def add(self, cols: np.ndarray, vals: np.ndarray, rhs: float, kind: str):
        r = len(self.rhs)
        self.ri.append(np.full(len(cols), r, dtype=np.int64))
        self.ci.append(np.asarray(cols, dtype=np.int64))
        self.val.append(np.asarray(vals, dtype=float))
        self.rhs.append(float(rhs))
        self.kind.append(_K[kind])

    def marginal_equal(self, c1: int, s1: tuple, c2: int, s2: tuple, kind: str):
        if c1 == c2 and s1 == s2:
            return
        for g1, g2 in zip(self.groups(s1), self.groups(s2)):
            cols = np.concatenate([c1 * self.width + g1, c2 * self.width + g2])
            vals = np.concatenate([np.ones(len(g1)), -np.ones(len(g2))])
            self.add(cols, vals, 0.0, kind)

    def marginal_fixed(self, c: int, s: tuple, probs: np.ndarray, kind: str):
        for g, p in zip(self.groups(s), probs):
            self.add(c * self.width + g, np.ones(len(g)), p, kind)

    def build(self, meta: dict) -> LpProblem:
        m = len(self.rhs)
        if m:
            A = sp.coo_matrix(
                (np.concatenate(self.val), (np.concatenate(self.ri), np.concatenate(self.ci))),
                shape=(m, self.n_vars),
            ).tocsr()
        else:
            A = sp.csr_matrix((0, self.n_vars))
        A.sum_duplicates()
        A.eliminate_zeros()
        return LpProblem(A, np.array(self.rhs), np.array(self.kind, dtype=np.int32), KINDS, meta)


def _components(members: list, contexts: list, fixed: set) -> list:
    """Split contexts (all agreeing on ``fixed`` parties) into single-input-move components."""
    parent = {m: m for m in members}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    n = len(contexts[members[0]]) if members else 0
    for q in range(n):
        if q in fixed:
            continue
        seen: dict = {}
        for m in members:
            key = contexts[m][:q] + contexts[m][q + 1 :]
            if key in seen:
                parent[find(m)] = find(seen[key])
            else:
                seen[key] = m
    reps: dict = {}
    for m in members:
        reps.setdefault(find(m), m)
    return sorted(reps.values())


def _reps_by_inputs(subset: tuple, contexts: list) -> dict:
    """inputs on ``subset`` -> one context index per connected component."""
    groups: dict = {}
    for i, c in enumerate(contexts):
        groups.setdefault(tuple(c[p] for p in subset), []).append(i)
    fixed = set(subset)
    return {k: _components(v, contexts, fixed) for k, v in groups.items()}


def _target_table(target: Behavior, image: tuple, tol: float) -> np.ndarray:
    m = reorder(marginal(target, image, tol=tol), image)
    return m.table.astype(float)


def assemble_lp(
    graph: InflationGraph,
    target: Behavior,
    input_restriction: Sequence[tuple] | None = None,
    options: AssemblyOptions | None = None,
    ns_tol: float = 1e-8,
) -> LpProblem:
    opts = options or AssemblyOptions()
    if set(target.names) != {"A", "B", "C"}:
        raise BehaviorError(f"target must be a behavior of A, B, C; got {target.names}")
    rep = is_nonsignalling(target, tol=ns_tol)
    if not rep.is_nonsignalling:
        raise BehaviorError(f"target signals (max violation {rep.max_violation:.3g})")
    n_in = dict(zip(target.names, target.n_inputs))

    contexts = default_restriction(graph) if input_restriction is None else sorted(set(map(tuple, input_restriction)))
    if not contexts:
        raise RestrictionError("input restriction is empty")
    n = graph.n_parties
    for c in contexts:
        if len(c) != n or any(not 0 <= x < n_in[p.kind] for x, p in zip(c, graph.parties)):
            raise RestrictionError(f"context {c} does not fit the inflated parties")
    index = {c: i for i, c in enumerate(contexts)}
    for g in graph.automorphisms:
        for c in contexts:
            if _act(g, c) not in index:
                raise RestrictionError(f"input restriction is not closed under automorphism {g}")

    allowed = None
    if opts.constraint_sets is not None:
        allowed = {frozenset(graph.index(nm) for nm in s) for s in opts.constraint_sets}

    rows = _Rows(n, len(contexts))
    W = rows.width
    # (ii) normalization
    for ci in range(len(contexts)):
        rows.add(np.arange(ci * W, (ci + 1) * W), np.ones(W), 1.0, "normalization")

    # nonsignalling of Q between contexts that differ at one party
    if opts.nonsignalling:
        for ci, c in enumerate(contexts):
            for p in range(n):
                rest = tuple(q for q in range(n) if q != p)
                for x in range(c[p] + 1, n_in[graph.parties[p].kind]):
                    cj = index.get(c[:p] + (x,) + c[p + 1 :])
                    if cj is not None:
                        rows.marginal_equal(ci, rest, cj, rest, "nonsignalling")

    # (iii) symmetry under wiring automorphisms
    words = np.arange(W)
    bits = (words[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    seen_pairs = set()
    for g in graph.automorphisms:
        if list(g) == list(range(n)):
            continue
        inv = np.argsort(g)
        gbits = bits[:, inv]  # bit at g(p) is the old bit at p
        gword = gbits @ (1 << (n - 1 - np.arange(n)))
        for ci, c in enumerate(contexts):
            cj = index[_act(g, c)]
            src = ci * W + words
            dst = cj * W + gword
            for u, v in zip(src.tolist(), dst.tolist()):
                if u == v:
                    continue
                key = (min(u, v), max(u, v))
                if key in seen_pairs:
                    continue
                seen_pairs.add(key)
                rows.add(np.array(key), np.array([1.0, -1.0]), 0.0, "symmetry")

    # (iv) injectable sets pinned to the target
    n_inj = 0
    for inj in injectable_sets(graph, opts.max_set_size):
        if allowed is not None and frozenset(inj.parties) not in allowed:
            continue
        table = _target_table(target, inj.image, ns_tol)
        for inputs, reps in _reps_by_inputs(inj.parties, contexts).items():
            probs = table[inputs].reshape(-1)
            for ci in reps:
                rows.marginal_fixed(ci, inj.parties, probs, "injectable")
        n_inj += 1

    # (v) equal statistics for isomorphic environments
    n_env = 0
    for form, members in environment_classes(graph, opts.max_set_size):
        if is_injectable_form(form):
            continue
        if allowed is not None:
            members = [m for m in members if frozenset(m) in allowed]
            if len(members) < 2:
                continue
        n_env += 1
        by_member = [_reps_by_inputs(m, contexts) for m in members]
        keys = set().union(*by_member)
        for inputs in sorted(keys):
            reps = [(m, ci) for m, rb in zip(members, by_member) for ci in rb.get(inputs, ())]
            for m, ci in reps[1:]:
                rows.marginal_equal(reps[0][1], reps[0][0], ci, m, "environment")

    meta = {
        "graph": graph.name,
        "parties": list(graph.names),
        "contexts": [list(c) for c in contexts],
        "injectable_sets": n_inj,
        "environment_classes": n_env,
    }
    return rows.build(meta)


def decode_witness(lp: LpProblem, q: np.ndarray) -> dict:
    """Inflated distribution as {context: array of shape (2,)*n}."""
    n = len(lp.meta["parties"])
    W = 2**n
    return {
        tuple(c): np.asarray(q[i * W : (i + 1) * W]).reshape((2,) * n)
        for i, c in enumerate(lp.meta["contexts"])
    }
