import json
from fractions import Fraction

import numpy as np
import pytest

from losrcert import strategies as S
from losrcert.behavior import BehaviorError, is_nonsignalling, correlator, mix
from losrcert.games import chsh_conditional, ghz3_score

S2 = np.sqrt(2)
F_STAR = 10 / (8 + 2 * S2)


def test_ghz_strategy():
    s = S.ghz_quantum_strategy()
    sc = ghz3_score(s.behavior())
    assert sc.combined == pytest.approx(2 * S2 + 8, abs=1e-9)
    assert abs(sc.c1_marginal) <= 1e-12
    assert sc.same == pytest.approx(2, abs=1e-9)
    # the same-game inputs are rectilinear, Charlie's input 1 is Hadamard
    for obs in (s.measurements[0][0], s.measurements[1][2], s.measurements[2][0]):
        assert np.allclose(obs.bloch_vector(), [0, 0, 1])
    assert np.allclose(s.measurements[2][1].bloch_vector(), [1, 0, 0])


def test_strategy_json_round_trip():
    s = S.ghz_quantum_strategy()
    back = S.QuantumStrategy.from_json_dict(json.loads(s.dumps()))
    assert back.behavior().allclose(s.behavior(), atol=1e-12)
    noisy = s.with_state(__import__("losrcert.qstate", fromlist=["x"]).white_noise_mix(s.state, 0.7))
    back = S.QuantumStrategy.from_json_dict(json.loads(noisy.dumps()))
    assert back.behavior().allclose(noisy.behavior(), atol=1e-12)


def test_box_reading_resolution():
    readings = {r.name: r for r in S.examine_box_readings()}
    assert not readings["literal"].nonsignalling
    assert readings["z-gated"].accepted
    box = S.ns_box_behavior()
    assert is_nonsignalling(box, tol=0).is_nonsignalling
    sc = ghz3_score(box)
    assert sc.combined == 12 and sc.c1_marginal == 0
    assert correlator(box, {"A": 0, "B": 2}) == 1 and correlator(box, {"B": 2, "C": 0}) == 1


def test_box_surfaces_failure(monkeypatch):
    monkeypatch.setattr(S, "NS_BOX_READINGS", (("literal", S._bob_literal),))
    with pytest.raises(BehaviorError, match="literal"):
        S.ns_box_behavior()


def test_noisy_family():
    assert ghz3_score(S.noisy_ghz_behavior(1.0)).combined == pytest.approx(2 * S2 + 8, abs=1e-9)
    assert ghz3_score(S.noisy_ghz_behavior(0.0)).combined == pytest.approx(0, abs=1e-12)
    assert ghz3_score(S.noisy_ghz_behavior(F_STAR)).combined == pytest.approx(10, abs=1e-9)
    # 0.9239 sits 4e-4 above the crossing; the score is 10 to within 5e-3 there
    assert ghz3_score(S.noisy_ghz_behavior(0.9239)).combined == pytest.approx(10, abs=5e-3)
    with pytest.raises(ValueError):
        S.noisy_ghz_behavior(1.01)


@pytest.mark.parametrize("f", [0.0, 0.3, 0.77, 1.0])
def test_noisy_is_mixture_of_ends(f):
    lhs = S.noisy_ghz_behavior(f)
    rhs = mix([S.noisy_ghz_behavior(1.0), S.noisy_ghz_behavior(0.0)], [f, 1 - f])
    assert lhs.allclose(rhs, atol=1e-10)


def test_classical_oracle():
    opt = S.classical_max_oracle()
    assert opt.status == "optimal" and opt.value == 10
    assert sum(opt.weights.values()) == 1
    c1 = sum(w * s.outputs[2][1] for s, w in opt.weights.items())
    assert c1 == 0
    sc = ghz3_score(opt.behavior(exact=True))
    assert sc.combined == 10 and sc.c1_marginal == 0
    assert len(opt.weights) <= 4


def test_classical_oracle_variants():
    assert S.classical_max_oracle(require_c1_zero=False, include_bell=False).value == 8
    res = S.classical_max_oracle(strategy_filter=lambda s: s.outputs[2][1] == 1)
    assert res.status == "infeasible"


def test_deterministic_points_bounded():
    # any single strategy with <C1> fixed at +-1: the linearized score is still at most 10 when C1 = -1
    for s in S.all_deterministic_strategies():
        obj, c1 = S.linearized_terms(s)
        assert obj <= 16
        if c1 == -1:
            assert obj <= 8


def test_classical_oracle_brute_force_pairs():
    # independent check: the optimum over pairs of strategies with opposite C1
    strats = S.all_deterministic_strategies()
    terms = [S.linearized_terms(s) for s in strats]
    up = max(o for o, c in terms if c == 1)
    down = max(o for o, c in terms if c == -1)
    assert Fraction(up + down, 2) == S.classical_max_oracle().value


def test_ghz_n():
    assert S.ghz_n_behavior(3).allclose(S.ghz_behavior(), atol=1e-12)
    b4 = S.ghz_n_behavior(4)
    assert b4.names == ("A", "B", "C1", "C2")
    val = chsh_conditional(b4, conditioning=(("C1", 1, 1), ("C2", 1, 1)))
    assert val == pytest.approx(2 * S2, abs=1e-9)
    assert is_nonsignalling(S.ghz_n_behavior(5)).is_nonsignalling
    for n in (2, 13):
        with pytest.raises(ValueError):
            S.ghz_n_behavior(n)


def test_random_quantum_behaviors_nonsignalling():
    rng = np.random.default_rng(7)
    for _ in range(100):
        assert is_nonsignalling(S.random_qubit_strategy(rng).behavior()).is_nonsignalling


def test_box_beats_quantum(box):
    assert ghz3_score(box).combined > 2 * S2 + 8
