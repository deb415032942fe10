"""Exact statevector simulation and the exact-diagonalization oracle.

Amplitude ordering: basis index b has qubit 0 as its least significant bit,
so the register reads |q_{N-1}, ..., q_0>.  Global phases are carried
explicitly on circuits and never silently normalized away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse.linalg

from .pauli import PauliString, QubitHamiltonian

NORM_TOL = 1e-10

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Gate:
    """Elementary gate: rotations, fixed Cliffords, CNOT, or a controlled wrapper."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None
    sub: "Gate | None" = None

    @staticmethod
    def rx(q: int, theta: float) -> "Gate":
        return Gate("rx", (q,), float(theta))

    @staticmethod
    def ry(q: int, theta: float) -> "Gate":
        return Gate("ry", (q,), float(theta))

    @staticmethod
    def rz(q: int, theta: float) -> "Gate":
        return Gate("rz", (q,), float(theta))

    @staticmethod
    def h(q: int) -> "Gate":
        return Gate("h", (q,))

    @staticmethod
    def v(q: int) -> "Gate":
        """V = (I - iX)/sqrt(2), i.e. Rx(pi/2)."""
        return Gate("v", (q,))

    @staticmethod
    def x(q: int) -> "Gate":
        return Gate("x", (q,))

    @staticmethod
    def phase(q: int, delta: float) -> "Gate":
        return Gate("phase", (q,), float(delta))

    @staticmethod
    def cnot(control: int, target: int) -> "Gate":
        if control == target:
            raise ValueError("CNOT control and target must differ")
        return Gate("cnot", (control, target))

    @staticmethod
    def controlled(inner: "Gate", control: int) -> "Gate":
        if control in inner.qubits:
            raise ValueError("control collides with inner gate operands")
        if inner.name == "controlled":
            raise ValueError("nested controlled gates are not supported")
        return Gate("controlled", (control,) + inner.qubits, sub=inner)

    def adjoint(self) -> "Gate":
        if self.name in ("h", "x", "cnot"):
            return self
        if self.name == "v":
            return Gate.rx(self.qubits[0], -math.pi / 2.0)
        if self.name in ("rx", "ry", "rz", "phase"):
            return replace(self, angle=-self.angle)
        if self.name == "controlled":
            return Gate.controlled(self.sub.adjoint(), self.qubits[0])
        raise ValueError(f"unknown gate kind {self.name!r}")

    def matrix(self) -> np.ndarray:
        """Dense matrix on the gate's own operands (little-endian within operands)."""
        return _gate_matrix(self)


def _mat_1q(name: str, angle: float | None) -> np.ndarray:
    if name == "rx":
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if name == "ry":
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "rz":
        return np.array(
            [[np.exp(-0.5j * angle), 0.0], [0.0, np.exp(0.5j * angle)]], dtype=complex
        )
    if name == "h":
        return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * _INV_SQRT2
    if name == "v":
        return np.array([[1.0, -1j], [-1j, 1.0]], dtype=complex) * _INV_SQRT2
    if name == "x":
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if name == "phase":
        return np.array([[1.0, 0.0], [0.0, np.exp(1j * angle)]], dtype=complex)
    raise ValueError(f"not a single-qubit gate: {name!r}")


# Little-endian operand order (control, target): index = control*1 + target*2,
# so CNOT swaps local indices 1 and 3.
_CNOT_MAT = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)


def _gate_matrix(gate: Gate) -> np.ndarray:
    if gate.name == "cnot":
        return _CNOT_MAT.copy()
    if gate.name == "controlled":
        inner = _gate_matrix(gate.sub)
        d = inner.shape[0]
        out = np.eye(2 * d, dtype=complex)
        # Control is the first operand, hence the lowest bit of the local index.
        idx = [1 + 2 * j for j in range(d)]
        out[np.ix_(idx, idx)] = inner
        return out
    return _mat_1q(gate.name, gate.angle)


@dataclass
class Circuit:
    """Ordered gate list plus an explicit accumulated global phase e^{i*phase}."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    global_phase: float = 0.0

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate):
        if len(set(gate.qubits)) != len(gate.qubits):
            raise ValueError("repeated operand in gate")
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"gate operand {q} out of range")

    def append(self, gate: Gate):
        self._check(gate)
        self.gates.append(gate)

    def extend(self, gates):
        for g in gates:
            self.append(g)

    def __len__(self):
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(
            self.n_qubits,
            [g.adjoint() for g in reversed(self.gates)],
            -self.global_phase,
        )

    def concatenated(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit-count mismatch")
        return Circuit(
            self.n_qubits,
            self.gates + other.gates,
            self.global_phase + other.global_phase,
        )


@dataclass
class StateVector:
    """Normalized complex amplitudes over 2^n basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amp = np.zeros(1 << n_qubits, dtype=complex)
        amp[0] = 1.0
        return cls(n_qubits, amp)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self):
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"statevector norm drifted to {self.norm()}")

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def prepare_basis_state(bits) -> StateVector:
    """Computational-basis state; bits[q] is the value of qubit q."""
    bits = [int(b) & 1 for b in bits]
    idx = 0
    for q, b in enumerate(bits):
        idx |= b << q
    amp = np.zeros(1 << len(bits), dtype=complex)
    amp[idx] = 1.0
    return StateVector(len(bits), amp)


def _apply_matrix(amp: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a dense matrix on the given qubits (little-endian operand order)."""
    k = len(qubits)
    psi = amp.reshape([2] * n)
    # Axis for qubit q is n-1-q (C order); mat's lowest operand bit is qubits[0].
    axes = [n - 1 - q for q in qubits]
    rest = [ax for ax in range(n) if ax not in axes]
    # Move operand axes to the front, highest operand bit first.
    perm = list(reversed(axes)) + rest
    psi = np.transpose(psi, perm).reshape(1 << k, -1)
    psi = mat @ psi
    psi = psi.reshape([2] * k + [2] * (n - k))
    inv = np.argsort(perm)
    return np.transpose(psi, inv).reshape(-1)


def _apply_cnot(amp: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    sel = (idx >> control & 1) == 1
    out = amp.copy()
    out[idx[sel] ^ (1 << target)] = amp[idx[sel]]
    return out


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    amp = state.amplitudes
    n = state.n_qubits
    if gate.name == "cnot":
        amp = _apply_cnot(amp, gate.qubits[0], gate.qubits[1], n)
    elif gate.name == "controlled" and gate.sub.name == "cnot":
        amp = _apply_matrix(amp, _gate_matrix(gate), gate.qubits, n)
    elif gate.name == "controlled":
        amp = _apply_matrix(amp, _gate_matrix(gate), gate.qubits, n)
    else:
        amp = _apply_matrix(amp, _mat_1q(gate.name, gate.angle), gate.qubits, n)
    return StateVector(n, amp)


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Multiply the state by the circuit unitary, gates in list order."""
    if circuit.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch between state and circuit")
    out = state
    for gate in circuit.gates:
        out = apply_gate(out, gate)
    if circuit.global_phase != 0.0:
        out = StateVector(out.n_qubits, out.amplitudes * np.exp(1j * circuit.global_phase))
    out.check_norm()
    return out


def apply_pauli_string(state: StateVector, string: PauliString) -> StateVector:
    """P|psi> for a plain Pauli string."""
    if string.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    n = state.n_qubits
    idx = np.arange(1 << n)
    src = idx ^ string.x_mask
    signs = 1.0 - 2.0 * (np.bitwise_count(src & string.z_mask) & 1).astype(float)
    phase = 1j ** ((string.x_mask & string.z_mask).bit_count() % 4)
    return StateVector(n, phase * signs * state.amplitudes[src])


def apply_pauli_exponential(state: StateVector, string: PauliString, angle: float) -> StateVector:
    """exp(-i*angle*P/2) |psi> = cos(angle/2)|psi> - i sin(angle/2) P|psi>."""
    if string.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    if string.is_identity:
        return StateVector(
            state.n_qubits, np.exp(-0.5j * angle) * state.amplitudes
        )
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    p_psi = apply_pauli_string(state, string)
    return StateVector(state.n_qubits, c * state.amplitudes - 1j * s * p_psi.amplitudes)


def apply_hamiltonian(state: StateVector, ham: QubitHamiltonian) -> StateVector:
    out = np.zeros_like(state.amplitudes)
    for term in ham.terms:
        out += term.coeff * apply_pauli_string(state, term.string).amplitudes
    return StateVector(state.n_qubits, out)


def expectation(state: StateVector, ham: QubitHamiltonian) -> float:
    """<psi|H|psi> / <psi|psi>, asserting the imaginary residual is negligible."""
    if ham.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    _assert_hermitian(ham)
    h_psi = apply_hamiltonian(state, ham)
    num = complex(np.vdot(state.amplitudes, h_psi.amplitudes))
    den = float(np.vdot(state.amplitudes, state.amplitudes).real)
    value = num / den
    if abs(value.imag) > NORM_TOL * max(1.0, abs(value.real)):
        raise ValueError(f"expectation has imaginary residual {value.imag}")
    return float(value.real)


def _assert_hermitian(ham: QubitHamiltonian):
    for t in ham.terms:
        if abs(complex(t.coeff).imag) > 1e-10:
            raise ValueError("Hamiltonian has a non-real Pauli coefficient")


def pauli_dense(string: PauliString) -> np.ndarray:
    """Dense matrix of a plain Pauli string (qubit 0 = least significant bit)."""
    n = string.n_qubits
    dim = 1 << n
    cols = np.arange(dim)
    rows = cols ^ string.x_mask
    signs = 1.0 - 2.0 * (np.bitwise_count(cols & string.z_mask) & 1).astype(float)
    phase = 1j ** ((string.x_mask & string.z_mask).bit_count() % 4)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, cols] = phase * signs
    return mat


def hamiltonian_dense(ham: QubitHamiltonian) -> np.ndarray:
    dim = 1 << ham.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in ham.terms:
        out += t.coeff * pauli_dense(t.string)
    return out


def circuit_unitary(circuit: Circuit, max_qubits: int = 12) -> np.ndarray:
    """Dense circuit unitary including the explicit global phase."""
    n = circuit.n_qubits
    if n > max_qubits:
        raise ValueError(f"circuit_unitary supports at most {max_qubits} qubits")
    dim = 1 << n
    cols = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        state = StateVector(n, np.zeros(dim, dtype=complex))
        state.amplitudes[b] = 1.0
        for gate in circuit.gates:
            state = apply_gate(state, gate)
        cols[:, b] = state.amplitudes
    return np.exp(1j * circuit.global_phase) * cols


def exact_ground_energy(ham: QubitHamiltonian, dense_limit: int = 16,
                        iterative_limit: int = 24, seed: int = 7):
    """Minimal eigenvalue and eigenvector of the Pauli-sum Hamiltonian.

    Dense diagonalization up to dense_limit qubits; seeded Lanczos above,
    up to iterative_limit.
    """
    _assert_hermitian(ham)
    n = ham.n_qubits
    if n > iterative_limit:
        raise ValueError(f"{n} qubits exceeds the configured limit {iterative_limit}")
    dim = 1 << n
    if n <= dense_limit:
        mat = hamiltonian_dense(ham)
        vals, vecs = np.linalg.eigh(mat)
        energy = float(vals[0])
        vec = vecs[:, 0]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)

        def matvec(v):
            return apply_hamiltonian(StateVector(n, v.astype(complex)), ham).amplitudes

        op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
        vals, vecs = scipy.sparse.linalg.eigsh(op, k=1, which="SA", v0=v0)
        energy = float(vals[0])
        vec = vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    state = StateVector(n, vec.astype(complex))
    residual = np.linalg.norm(
        apply_hamiltonian(state, ham).amplitudes - energy * state.amplitudes
    )
    if residual > 1e-8:
        raise ValueError(f"eigenpair residual {residual} exceeds 1e-8")
    return energy, state


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    return abs(abs(a.overlap(b)) - 1.0) <= tol


def sector_restricted_eigenvalues(ham: QubitHamiltonian, fixed_bits: dict[int, int]) -> np.ndarray:
    """Eigenvalues of H restricted to basis states with the given qubit values.

    Valid when every term acts with I or Z on the fixed qubits.
    """
    n = ham.n_qubits
    idx = np.arange(1 << n)
    mask = np.ones(idx.shape, dtype=bool)
    for q, b in fixed_bits.items():
        mask &= (idx >> q & 1) == int(b)
    sel = idx[mask]
    sub = hamiltonian_dense(ham)[np.ix_(sel, sel)]
    return np.linalg.eigvalsh(sub)
