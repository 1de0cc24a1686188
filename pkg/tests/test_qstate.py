import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from losrcert import qstate
from losrcert.behavior import Behavior, marginal, product
from losrcert.qstate import BinaryObservable, QuantumState, StateError

S2 = np.sqrt(2)


def test_ghz3_amplitudes():
    psi = qstate.ghz_state(3).data
    expect = np.zeros(8)
    expect[[0, 7]] = 1 / S2
    assert np.allclose(psi, expect, atol=1e-15)


def test_ghz2_is_phi_plus():
    assert np.allclose(qstate.ghz_state(2).data, qstate.phi_plus().data)


@pytest.mark.parametrize("n", [2, 3, 5, 12])
def test_ghz_norm(n):
    assert abs(np.linalg.norm(qstate.ghz_state(n).data) - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 0, 13])
def test_ghz_rejects(n):
    with pytest.raises(StateError):
        qstate.ghz_state(n)


def test_w_state():
    w = qstate.w_state()
    nz = {i: v for i, v in enumerate(w.data) if abs(v) > 0}
    assert set(nz) == {1, 2, 4}
    assert np.allclose(list(nz.values()), 1 / np.sqrt(3))
    assert abs(np.linalg.norm(w.data) - 1) < 1e-12


def test_w_single_qubit_marginal():
    # summing |amp|^2 directly: qubit 0 is 1 only for index 4
    for k in range(3):
        rho = qstate.reduced_density(qstate.w_state(), [k])
        assert np.allclose(rho, np.diag([2 / 3, 1 / 3]), atol=1e-12)


def test_white_noise_bounds():
    g = qstate.ghz_state(3)
    assert np.allclose(qstate.white_noise_mix(g, 1.0).data, g.density())
    assert np.allclose(qstate.white_noise_mix(g, 0.0).data, np.eye(8) / 8)
    half = qstate.white_noise_mix(g, 0.5)
    rho = half.data
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    for f in (-0.1, 1.2):
        with pytest.raises(StateError):
            qstate.white_noise_mix(g, f)


def test_state_validation():
    with pytest.raises(StateError):
        QuantumState(np.array([1.0, 1.0]))
    with pytest.raises(StateError):
        QuantumState(np.array([[1.0, 0.5], [0.0, 0.0]]))
    with pytest.raises(StateError):
        QuantumState(np.diag([1.5, -0.5]))


def test_observable_validation():
    with pytest.raises(StateError):
        BinaryObservable(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(StateError):
        BinaryObservable(np.array([[0.5, 0.0], [0.0, 0.0]]))
    z = qstate.rectilinear()
    assert np.allclose(z.operator, qstate.PAULI_Z)
    assert np.allclose(qstate.hadamard().bloch_vector(), [1, 0, 0])


def _brute_born(psi, mats):
    """Sum over amplitudes with explicit Kronecker products of projectors."""
    k = len(mats)
    n_in = [len(m) for m in mats]
    table = np.zeros(tuple(n_in) + (2,) * k)
    for ctx in np.ndindex(*n_in):
        for outs in np.ndindex(*(2,) * k):
            P = np.array([[1.0]])
            for p, (x, a) in enumerate(zip(ctx, outs)):
                o = mats[p][x]
                P = np.kron(P, o.projector_plus if a == 0 else o.projector_minus)
            table[ctx + outs] = np.real(np.vdot(psi, P @ psi))
    return table


def test_born_ghz_rectilinear():
    z = qstate.rectilinear()
    beh = qstate.born_behavior(qstate.ghz_state(3), [[z], [z], [z]])
    dist = beh.table[0, 0, 0]
    assert abs(dist[0, 0, 0] - 0.5) < 1e-12 and abs(dist[1, 1, 1] - 0.5) < 1e-12
    assert abs(dist.sum() - 1) < 1e-12


def test_born_matches_brute_force(rng):
    from losrcert.strategies import random_qubit_strategy

    s = random_qubit_strategy(rng)
    brute = _brute_born(s.state.data, s.measurements)
    assert np.allclose(s.behavior().table, brute, atol=1e-12)
    mixed = QuantumState(s.state.density())
    assert np.allclose(qstate.born_behavior(mixed, s.measurements).table, brute, atol=1e-12)


def test_born_product_state_deterministic():
    z = qstate.rectilinear()
    beh = qstate.born_behavior(qstate.basis_state([0, 0, 0]), [[z], [z], [z]])
    assert beh.table[0, 0, 0, 0, 0, 0] == pytest.approx(1.0, abs=1e-12)


def test_born_hadamard_charlie_unbiased():
    z, h = qstate.rectilinear(), qstate.hadamard()
    beh = qstate.born_behavior(qstate.ghz_state(3), [[z], [z], [h]])
    m = marginal(beh, ["C"]).table[0]
    assert np.allclose(m, [0.5, 0.5], atol=1e-12)


def test_born_dimension_mismatch():
    z = qstate.rectilinear()
    with pytest.raises(StateError):
        qstate.born_behavior(qstate.ghz_state(3), [[z], [z]])
    with pytest.raises(StateError):
        qstate.born_behavior(qstate.ghz_state(2), [[z], []])


@settings(max_examples=30, deadline=None)
@given(f=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_born_affine_in_noise(f, seed):
    from losrcert.strategies import random_qubit_strategy

    s = random_qubit_strategy(np.random.default_rng(seed))
    noisy = qstate.born_behavior(qstate.white_noise_mix(s.state, f), s.measurements).table
    pure = s.behavior().table
    mixed = qstate.born_behavior(QuantumState(np.eye(8) / 8), s.measurements).table
    assert np.max(np.abs(noisy - (f * pure + (1 - f) * mixed))) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_product_state_factorizes(seed):
    rng = np.random.default_rng(seed)
    vecs = []
    for _ in range(3):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        vecs.append(v / np.linalg.norm(v))
    state = qstate.product_state(vecs)
    meas = []
    for k in (2, 3, 2):
        obs = []
        for _ in range(k):
            n = rng.normal(size=3)
            obs.append(BinaryObservable.from_bloch(n / np.linalg.norm(n)))
        meas.append(obs)
    joint = qstate.born_behavior(state, meas)
    singles = [
        qstate.born_behavior(QuantumState(v), [m], names=[name])
        for v, m, name in zip(vecs, meas, "ABC")
    ]
    assert np.max(np.abs(joint.table - product(singles).table)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_born_tables_are_distributions(seed):
    from losrcert.strategies import random_qubit_strategy

    beh = random_qubit_strategy(np.random.default_rng(seed)).behavior()
    assert isinstance(beh, Behavior)
    assert beh.table.min() >= 0
    assert np.max(np.abs(beh.table.sum(axis=(3, 4, 5)) - 1)) <= 1e-9
