import numpy as np
import pytest

from losrcert import behavior as bh
from losrcert.behavior import BehaviorError, marginal
from losrcert.inflation import (
    CONTRADICTION_SETS,
    BisectionError,
    CertifyConfig,
    InflationError,
    RestrictionError,
    assemble_lp,
    build_cut_inflation,
    build_ring_inflation,
    certify,
    decode_witness,
    default_restriction,
    environment_classes,
    injectable_sets,
    monotone_verdicts,
    ring_symmetries,
    threshold_bisect,
)
from losrcert.lpsolve import FEASIBLE, INFEASIBLE, validate_certificate
from losrcert.strategies import (
    PARTIES_3,
    DeterministicStrategy,
    classical_opt_behavior,
    ghz_behavior,
    noisy_ghz_behavior,
)

CUT = CertifyConfig(order=2)


def test_ring_sizes_and_symmetries():
    g2 = build_ring_inflation(2)
    assert g2.n_parties == 6 and g2.name == "ring-6"
    assert len(g2.automorphisms) == 2
    assert len(ring_symmetries(g2)) == 12
    g3 = build_ring_inflation(3)
    assert g3.n_parties == 9 and len(g3.automorphisms) == 2
    assert len(ring_symmetries(g3)) == 72
    non = build_ring_inflation(3, rings=(3,))
    assert len(non.automorphisms) == 3 and len(ring_symmetries(non)) == 18


def test_cut_graph():
    g = build_cut_inflation()
    assert g.names == ("A1", "B1", "C1", "A2", "B2", "C2")
    assert len(g.automorphisms) == 1


def test_nonfanout_and_orders():
    for bad in (1, 4):
        with pytest.raises(InflationError):
            build_ring_inflation(bad)
    with pytest.raises(InflationError):
        build_ring_inflation(3, rings=(1, 1))
    for g in (build_ring_inflation(2), build_ring_inflation(3), build_cut_inflation()):
        for p in g.parties:
            assert len(p.sources) == 2
        copies = {}
        for p in g.parties:
            for s in p.sources:
                copies.setdefault(s, []).append(p.kind)
        assert all(len(v) == len(set(v)) for v in copies.values())


def _names(g, sets):
    return {frozenset(g.names[i] for i in s.parties) for s in sets}


def test_injectable_sets_hexagon():
    g = build_ring_inflation(2)
    names = _names(g, injectable_sets(g))
    assert frozenset({"A1", "B1"}) in names
    assert frozenset({"B1", "C1"}) in names
    # C1 shares beta with A2, not A1
    assert frozenset({"A1", "C1"}) not in names
    assert frozenset({"A2", "C1"}) in names
    assert not any(len(s) == 3 for s in names)


def test_injectable_sets_triangle_copy():
    g = build_ring_inflation(3)
    names = _names(g, injectable_sets(g))
    assert frozenset({"A1", "B1", "C1"}) in names
    assert sum(len(s) == 3 for s in names) == 1
    assert sum(len(s) == 1 for s in names) == 9


def test_environment_classes_group_isomorphic_subsets():
    g = build_ring_inflation(2)
    for form, members in environment_classes(g):
        assert len(members) >= 2
        assert all(len(m) == len(members[0]) for m in members)


def test_contradiction_sets_are_injectable_or_paired():
    g = build_cut_inflation()
    inj = _names(g, injectable_sets(g))
    for s in CONTRADICTION_SETS:
        assert frozenset(s) in inj or len(s) == 2


def test_restriction_must_be_closed():
    g = build_ring_inflation(2)
    ctxs = default_restriction(g)
    assert len(ctxs) > 1
    lone = [c for c in ctxs if c != tuple(0 if p.kind != "B" else 2 for p in g.parties)][:1]
    with pytest.raises(RestrictionError):
        assemble_lp(g, ghz_behavior(), lone)


def test_target_checks():
    g = build_ring_inflation(2)
    with pytest.raises(BehaviorError):
        assemble_lp(g, bh.uniform(PARTIES_3[:2]))
    sig = bh.from_function(PARTIES_3, lambda ctx, o: 1.0 if o == (1 if ctx[1] == 0 else -1, 1, 1) else 0.0)
    with pytest.raises(BehaviorError):
        assemble_lp(g, sig)


def test_row_kinds_present():
    lp = assemble_lp(build_ring_inflation(3), ghz_behavior())
    counts = lp.kind_counts()
    for k in ("normalization", "nonsignalling", "symmetry", "injectable", "environment"):
        assert counts[k] > 0


@pytest.mark.parametrize("order", [2, 3])
def test_local_targets_feasible(order):
    cfg = CertifyConfig(order=order)
    det = DeterministicStrategy(((1, -1), (1, 1, -1), (-1, 1))).behavior()
    for target in (det, bh.uniform(PARTIES_3), classical_opt_behavior()):
        out = certify(target, cfg)
        assert out.verdict == FEASIBLE
        assert out.lp.residual(out.witness) <= 1e-8
        assert out.witness.min() >= 0


def test_witness_reproduces_target_on_triangle_copy():
    target = classical_opt_behavior()
    out = certify(target, CertifyConfig(order=3))
    q = decode_witness(out.lp, out.witness)
    names = out.lp.meta["parties"]
    ia, ib, ic = (names.index(n) for n in ("A1", "B1", "C1"))
    for ctx, table in q.items():
        tri = table.sum(axis=tuple(k for k in range(len(names)) if k not in (ia, ib, ic)))
        want = target.table[ctx[ia], ctx[ib], ctx[ic]]
        assert np.allclose(tri, want, atol=1e-7)


@pytest.mark.parametrize("order", [2, 3])
def test_ghz_refuted(order):
    out = certify(ghz_behavior(), CertifyConfig(order=order))
    assert out.verdict == INFEASIBLE
    assert validate_certificate(out.lp, out.certificate)
    assert out.certificate_gap > 1e-3


def test_box_refuted_with_contradiction_sets(box):
    cfg = CertifyConfig(order=2, constraint_sets=CONTRADICTION_SETS)
    out = certify(box, cfg)
    assert out.verdict == INFEASIBLE
    assert validate_certificate(out.lp, out.certificate)


def test_hexagon_alone_cannot_refute_box(box):
    # a bare ring pins no triple, so the conditioned game is never tied to the target
    out = certify(box, CertifyConfig(order=2, wiring="ring"))
    assert out.verdict == FEASIBLE


def test_relabelling_keeps_verdict():
    g = build_cut_inflation()
    order = [3, 4, 5, 0, 1, 2]
    assert len(g.relabel(order).automorphisms) == len(g.automorphisms)
    for target, want in ((ghz_behavior(), INFEASIBLE), (noisy_ghz_behavior(0.5), FEASIBLE)):
        from losrcert.lpsolve import solve_feasibility

        a = solve_feasibility(assemble_lp(g, target)).status
        b = solve_feasibility(assemble_lp(g.relabel(order), target)).status
        assert a == b == want


def test_bisection_preconditions():
    with pytest.raises(BisectionError):
        threshold_bisect(noisy_ghz_behavior, CUT, lo=0.99, hi=1.0)
    with pytest.raises(BisectionError):
        threshold_bisect(noisy_ghz_behavior, CUT, lo=0.0, hi=0.5)


def test_bisection_monotone():
    res = threshold_bisect(noisy_ghz_behavior, CUT, precision=0.02, probes=(0.9, 0.95))
    assert res.monotone and not res.issues
    assert 0.85 < res.threshold < 0.9
    assert res.hi - res.lo <= 0.02


def test_monotone_helper():
    assert monotone_verdicts([(0.1, FEASIBLE), (0.5, INFEASIBLE), (0.9, INFEASIBLE)])
    assert not monotone_verdicts([(0.1, INFEASIBLE), (0.5, FEASIBLE)])
