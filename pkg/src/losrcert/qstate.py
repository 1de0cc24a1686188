"""Dense n-qubit states, binary projective measurements and the Born rule."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .behavior import Behavior, Party

CONSTRUCTION_TOL = 1e-12
IDEMPOTENCE_TOL = 1e-10
PSD_TOL = 1e-10
SUM_TOL = 1e-9
MAX_QUBITS = 12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class QuantumState:
    """A pure amplitude vector or a density operator on a register of subsystems.

    ``dims`` lists the local dimension of every subsystem (all 2 for qubits).
    """

    data: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if data.ndim not in (1, 2):
            raise StateError("state data must be a vector or a square matrix")
        d = data.shape[0]
        if data.ndim == 2 and data.shape != (d, d):
            raise StateError(f"density operator must be square, got {data.shape}")
        dims = tuple(self.dims) if self.dims else _qubit_dims(d)
        if int(np.prod(dims)) != d:
            raise StateError(f"subsystem dims {dims} do not multiply to {d}")
        object.__setattr__(self, "dims", dims)

        if data.ndim == 1:
            norm = np.linalg.norm(data)
            if abs(norm - 1.0) > CONSTRUCTION_TOL:
                raise StateError(f"amplitude vector has norm {norm!r}")
        else:
            herm = np.max(np.abs(data - data.conj().T)) if d else 0.0
            if herm > CONSTRUCTION_TOL:
                raise StateError(f"density operator not Hermitian (deviation {herm:.3g})")
            tr = np.trace(data).real
            if abs(tr - 1.0) > CONSTRUCTION_TOL:
                raise StateError(f"density operator has trace {tr!r}")
            lam_min = np.linalg.eigvalsh(data).min()
            if lam_min < -PSD_TOL:
                raise StateError(f"density operator not PSD (min eigenvalue {lam_min:.3g})")

    @property
    def dimension(self) -> int:
        return self.data.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)


def _qubit_dims(d: int) -> tuple[int, ...]:
    n = int(round(np.log2(d))) if d > 0 else -1
    if n < 1 or 2**n != d:
        raise StateError(f"dimension {d} is not a power of two; pass dims explicitly")
    return (2,) * n


def basis_state(bits: Sequence[int]) -> QuantumState:
    n = len(bits)
    vec = np.zeros(2**n, dtype=complex)
    vec[int("".join(str(int(b)) for b in bits), 2)] = 1.0
    return QuantumState(vec)


def ghz_state(n: int) -> QuantumState:
    """(|0...0> + |1...1>)/sqrt(2) on ``n`` qubits."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise StateError(f"GHZ state needs n >= 2 qubits, got {n!r}")
    if n > MAX_QUBITS:
        raise StateError(f"at most {MAX_QUBITS} qubits supported, got {n}")
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 1 / np.sqrt(2)
    return QuantumState(vec)


def phi_plus() -> QuantumState:
    return ghz_state(2)


def w_state() -> QuantumState:
    """(|001> + |010> + |100>)/sqrt(3)."""
    vec = np.zeros(8, dtype=complex)
    vec[[1, 2, 4]] = 1 / np.sqrt(3)
    return QuantumState(vec)


def white_noise_mix(state: QuantumState, f: float) -> QuantumState:
    """Return ``f * rho + (1 - f) * I/d`` as a density operator."""
    f = float(f)
    if not 0.0 <= f <= 1.0:
        raise StateError(f"fidelity weight must lie in [0, 1], got {f}")
    d = state.dimension
    rho = f * state.density() + (1.0 - f) * np.eye(d, dtype=complex) / d
    # kill rounding asymmetry so the strict Hermiticity check holds
    rho = 0.5 * (rho + rho.conj().T)
    return QuantumState(rho, state.dims)


def reduced_density(state: QuantumState, keep: Sequence[int]) -> np.ndarray:
    """Partial trace onto the subsystems in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    n = state.n_subsystems
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise StateError(f"invalid subsystem selection {keep}")
    rho = state.density().reshape(state.dims + state.dims)
    traced = [k for k in range(n) if k not in keep]
    # trace out from the highest index so axis positions stay valid
    for k in sorted(traced, reverse=True):
        m = rho.ndim // 2
        rho = np.trace(rho, axis1=k, axis2=k + m)
    dk = int(np.prod([state.dims[k] for k in keep]))
    return rho.reshape(dk, dk)


@dataclass(frozen=True)
class BinaryObservable:
    """A two-outcome projective measurement given by its +1 projector."""

    projector_plus: np.ndarray

    def __post_init__(self):
        p = np.array(self.projector_plus, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise StateError("projector must be a square matrix")
        if np.max(np.abs(p - p.conj().T)) > CONSTRUCTION_TOL:
            raise StateError("projector is not Hermitian")
        if np.max(np.abs(p @ p - p)) > IDEMPOTENCE_TOL:
            raise StateError("projector is not idempotent")
        p.setflags(write=False)
        object.__setattr__(self, "projector_plus", p)

    @property
    def dimension(self) -> int:
        return self.projector_plus.shape[0]

    @property
    def projector_minus(self) -> np.ndarray:
        return np.eye(self.dimension) - self.projector_plus

    @property
    def operator(self) -> np.ndarray:
        """The +-1 valued observable Pi_+ - Pi_-."""
        return 2 * self.projector_plus - np.eye(self.dimension)

    @classmethod
    def from_bloch(cls, vector: Sequence[float]) -> "BinaryObservable":
        n = np.asarray(vector, dtype=float)
        norm = np.linalg.norm(n)
        if n.shape != (3,) or abs(norm - 1.0) > 1e-12:
            raise StateError(f"Bloch vector must be a unit 3-vector, got {vector!r}")
        proj = 0.5 * (PAULI_I + n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z)
        proj = 0.5 * (proj + proj.conj().T)
        return cls(proj)

    @classmethod
    def xz_angle(cls, theta: float) -> "BinaryObservable":
        """cos(theta) Z + sin(theta) X."""
        return cls.from_bloch([np.sin(theta), 0.0, np.cos(theta)])

    def bloch_vector(self) -> np.ndarray:
        if self.dimension != 2:
            raise StateError("Bloch vectors only exist for qubit observables")
        op = self.operator
        return np.real([np.trace(op @ s) / 2 for s in (PAULI_X, PAULI_Y, PAULI_Z)])


def rectilinear() -> BinaryObservable:
    return BinaryObservable.from_bloch([0.0, 0.0, 1.0])


def hadamard() -> BinaryObservable:
    return BinaryObservable.from_bloch([1.0, 0.0, 0.0])


def _isometry_stack(observables: Sequence[BinaryObservable]) -> np.ndarray:
    """W[x, a, r, i] = conj(V_a^x)[i, r] with Pi_a^x = V V^dagger, padded to a common rank."""
    d = observables[0].dimension
    isos = []
    for obs in observables:
        per_outcome = []
        for proj in (obs.projector_plus, obs.projector_minus):
            w, v = np.linalg.eigh(proj)
            per_outcome.append(v[:, w > 0.5])
        isos.append(per_outcome)
    rank = max(max(v.shape[1] for v in pair) for pair in isos)
    rank = max(rank, 1)
    out = np.zeros((len(observables), 2, rank, d), dtype=complex)
    for x, pair in enumerate(isos):
        for a, v in enumerate(pair):
            out[x, a, : v.shape[1], :] = v.conj().T
    return out


def born_behavior(
    state: QuantumState,
    measurements: Sequence[Sequence[BinaryObservable]],
    names: Sequence[str] | None = None,
) -> Behavior:
    """Tabulate P(a_1..a_k | x_1..x_k) = Tr[rho (Pi_a1^x1 (x) ... (x) Pi_ak^xk)].

    One entry of ``measurements`` per party, holding one observable per input.
    Party dimensions are read off the observables and must multiply to the
    state dimension. Parties are consecutive tensor factors of the state.
    """
    k = len(measurements)
    if k == 0 or any(len(m) == 0 for m in measurements):
        raise StateError("every party needs at least one input")
    pdims = []
    for m in measurements:
        dset = {o.dimension for o in m}
        if len(dset) != 1:
            raise StateError("observables of one party must share a dimension")
        pdims.append(dset.pop())
    if int(np.prod(pdims)) != state.dimension:
        raise StateError(
            f"party dimensions {pdims} do not match state dimension {state.dimension}"
        )
    if names is None:
        names = [chr(ord("A") + i) for i in range(k)] if k <= 26 else [f"P{i}" for i in range(k)]
    n_inputs = [len(m) for m in measurements]

    if state.is_pure:
        table = _born_pure(state.data.reshape(pdims), measurements)
    else:
        table = _born_mixed(state.data.reshape(tuple(pdims) * 2), measurements)

    table = _clean_table(table, n_inputs)
    return Behavior([Party(n, c) for n, c in zip(names, n_inputs)], table)


def _born_pure(psi: np.ndarray, measurements) -> np.ndarray:
    k = len(measurements)
    t = psi
    for m in measurements:
        w = _isometry_stack(m)  # (x, a, r, i)
        t = np.tensordot(t, w, axes=([0], [3]))  # rest..., x, a, r
    # axes now (x1, a1, r1, x2, a2, r2, ...)
    prob = np.abs(t) ** 2
    prob = prob.sum(axis=tuple(3 * i + 2 for i in range(k)))
    order = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
    return np.transpose(prob, order)


def _born_mixed(rho: np.ndarray, measurements) -> np.ndarray:
    k = len(measurements)
    t = rho
    for step, m in enumerate(measurements):
        proj = np.stack(
            [np.stack([o.projector_plus, o.projector_minus]) for o in m]
        )  # (x, a, i, j)
        remaining = k - step
        # sum_{i,j} rho[i.., j..] Pi[j, i]
        t = np.tensordot(t, proj, axes=([0, remaining], [3, 2]))
    order = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
    return np.transpose(t.real, order)


def _clean_table(table: np.ndarray, n_inputs: Sequence[int]) -> np.ndarray:
    k = len(n_inputs)
    if table.min() < -1e-10 or table.max() > 1 + 1e-10:
        raise StateError("Born-rule probabilities outside [0, 1]; invalid projectors?")
    table = np.clip(table, 0.0, 1.0)
    sums = table.sum(axis=tuple(range(k, 2 * k)), keepdims=True)
    if np.max(np.abs(sums - 1.0)) > SUM_TOL:
        raise StateError(
            f"context sums deviate from 1 by {np.max(np.abs(sums - 1.0)):.3g}; invalid projectors"
        )
    return table / sums


def product_state(vectors: Sequence[Sequence[complex]]) -> QuantumState:
    vec = np.array([1.0 + 0j])
    for v in vectors:
        vec = np.kron(vec, np.asarray(v, dtype=complex))
    return QuantumState(vec / np.linalg.norm(vec))
