"""Ansatz construction: symmetry-conserving dUCC-SD and hardware-efficient
layered circuits.

The dUCC state is an ordered product of exponentials exp(t_mu (tau_mu -
tau_mu^+)), one per unique single/double excitation, applied to the
parity-encoded reference determinant.  The operator ordering is fixed at
construction (singles first, then doubles, each lexicographic by index
tuples) and never reordered, since the ordering affects the state.

Hardware-efficient ansatze interleave parameterized single-qubit rotation
layers (zx or zyz) with fixed CNOT entangling layers, either merged
(two entanglers back to back) or splitted (a rotation layer between them),
acting on |0...0>.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .compiler import ExponentialGroup, compile_group
from .fermion import OccupationDeterminant, OrbitalBasis, symmetry_qubits
from .pauli import (
    PauliString,
    TaperSector,
    excitation_operator_sum,
    sector_from_reference,
    taper_reference_bits,
    taper_terms,
)
from .simulator import Circuit, Gate, StateVector, apply_pauli_exponential, prepare_basis_state


@dataclass(frozen=True)
class Excitation:
    """Particle-hole excitation from reference-occupied to virtual orbitals."""

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]
    amplitude: float = 0.0

    def __post_init__(self):
        if len(self.occupied) != len(self.virtual):
            raise ValueError("occupied/virtual index counts differ")
        if tuple(sorted(self.occupied)) != self.occupied or tuple(sorted(self.virtual)) != self.virtual:
            raise ValueError("index tuples must be sorted")
        if set(self.occupied) & set(self.virtual):
            raise ValueError("occupied and virtual sets overlap")

    @property
    def rank(self) -> int:
        return len(self.occupied)


def enumerate_sd_excitations(basis: OrbitalBasis, ref: OccupationDeterminant) -> list[Excitation]:
    """All unique singles and doubles conserving total 2m and parity.

    Deterministic order: singles first, then doubles, each lexicographic by
    (occupied, virtual) index tuples.
    """
    occ = [i for i, f in enumerate(ref.occupations) if f]
    virt = [i for i, f in enumerate(ref.occupations) if not f]
    orb = basis.orbitals
    singles = []
    for i in occ:
        for a in virt:
            if orb[i].two_m != orb[a].two_m:
                continue
            if orb[i].parity != orb[a].parity:
                continue
            singles.append(Excitation((i,), (a,)))
    doubles = []
    for i, j in itertools.combinations(occ, 2):
        for a, b in itertools.combinations(virt, 2):
            if orb[i].two_m + orb[j].two_m != orb[a].two_m + orb[b].two_m:
                continue
            if (orb[i].parity + orb[j].parity) % 2 != (orb[a].parity + orb[b].parity) % 2:
                continue
            doubles.append(Excitation((i, j), (a, b)))
    singles.sort(key=lambda e: (e.occupied, e.virtual))
    doubles.sort(key=lambda e: (e.occupied, e.virtual))
    return singles + doubles


def excitation_generators(exc: Excitation, n_orbs: int) -> ExponentialGroup:
    """Pauli-exponential group realizing exp(t (tau - tau^+)) at unit amplitude.

    tau = a+_a a+_b ... a_j a_i for excitation (i, j, ...) -> (a, b, ...).
    The anti-Hermitian combination expands into strings with imaginary
    coefficients i*g; exp(t(tau - tau+)) = prod exp(-i (-2 g t) P / 2), so the
    stored angles are -2g per unit t.  The strings mutually commute.
    """
    creations = list(exc.virtual)
    annihilations = list(reversed(exc.occupied))
    tau = excitation_operator_sum(creations, annihilations, n_orbs)
    terms = []
    for (x, z), c in tau.items():
        g = 2.0 * c.imag  # (c - conj(c)) = 2i Im(c)
        if abs(g) < 1e-14:
            continue
        terms.append((PauliString(n_orbs, x, z), -2.0 * g))
    group = ExponentialGroup(n_orbs, terms)
    group.require_commuting()
    return group


def _taper_group(group: ExponentialGroup, sector: TaperSector,
                 parity_qubit: int, last_qubit: int) -> ExponentialGroup:
    from .pauli import PauliTerm  # local import to avoid a cycle at module load

    terms = [PauliTerm(angle, s) for s, angle in group.terms]
    tapered = taper_terms(terms, group.n_qubits, sector, parity_qubit, last_qubit)
    return ExponentialGroup(
        group.n_qubits - 2, [(t.string, float(t.coeff.real)) for t in tapered]
    )


@dataclass
class DuccAnsatz:
    """Ordered dUCC-SD excitation list with cached Pauli generators.

    When tapered (the default), generators and the reference preparation act
    on the n_orbs - 2 qubit register fixed by the reference's symmetry sector.
    """

    basis: OrbitalBasis
    reference: OccupationDeterminant
    excitations: list[Excitation]
    tapered: bool = True
    groups: list[ExponentialGroup] = field(init=False)
    reference_bits: list[int] = field(init=False)
    n_qubits: int = field(init=False)
    sector: TaperSector | None = field(init=False)

    def __post_init__(self):
        n_orbs = self.basis.n_orbs
        raw = [excitation_generators(exc, n_orbs) for exc in self.excitations]
        if self.tapered:
            pq, lq = symmetry_qubits(self.basis)
            self.sector = sector_from_reference(self.reference.occupations, pq, lq)
            self.groups = [_taper_group(g, self.sector, pq, lq) for g in raw]
            self.reference_bits = taper_reference_bits(self.reference.occupations, pq, lq)
            self.n_qubits = n_orbs - 2
        else:
            self.sector = None
            self.groups = raw
            from .pauli import parity_encode_bits

            self.reference_bits = parity_encode_bits(self.reference.occupations)
            self.n_qubits = n_orbs

    @classmethod
    def build(cls, basis: OrbitalBasis, ref: OccupationDeterminant,
              tapered: bool = True) -> "DuccAnsatz":
        return cls(basis, ref, enumerate_sd_excitations(basis, ref), tapered=tapered)

    @property
    def n_params(self) -> int:
        return len(self.excitations)

    def reference_state(self) -> StateVector:
        return prepare_basis_state(self.reference_bits)

    def state(self, theta) -> StateVector:
        """Ansatz state via direct Pauli-exponential application (fast path)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError("parameter count mismatch")
        state = self.reference_state()
        for t, group in zip(theta, self.groups):
            for string, base_angle in group.terms:
                state = apply_pauli_exponential(state, string, base_angle * t)
        return state


def build_ducc_circuit(ansatz: DuccAnsatz, theta, strategy: str = "three-step") -> Circuit:
    """Reference-preparation X gates followed by compiled exponential blocks."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_params,):
        raise ValueError(
            f"expected {ansatz.n_params} amplitudes, got {theta.shape}"
        )
    circuit = Circuit(ansatz.n_qubits)
    for q, bit in enumerate(ansatz.reference_bits):
        if bit:
            circuit.append(Gate.x(q))
    for t, group in zip(theta, ansatz.groups):
        scaled = ExponentialGroup(
            group.n_qubits, [(s, a * float(t)) for s, a in group.terms]
        )
        block = compile_group(scaled, strategy)
        circuit = circuit.concatenated(block)
    return circuit


@dataclass(frozen=True)
class HeAnsatz:
    """Hardware-efficient layered ansatz specification."""

    n_qubits: int
    layers: int
    layout: str = "splitted"
    rotation: str = "zyz"

    def __post_init__(self):
        if self.layout not in ("merged", "splitted"):
            raise ValueError("layout must be 'merged' or 'splitted'")
        if self.rotation not in ("zx", "zyz"):
            raise ValueError("rotation must be 'zx' or 'zyz'")
        if self.layers < 0:
            raise ValueError("layer count must be nonnegative")

    @property
    def params_per_qubit(self) -> int:
        return 2 if self.rotation == "zx" else 3

    @property
    def n_rotation_layers(self) -> int:
        if self.layout == "merged":
            return self.layers + 1
        return 2 * self.layers + 1

    @property
    def n_params(self) -> int:
        return self.params_per_qubit * self.n_qubits * self.n_rotation_layers


def _entangler_pairs(n_qubits: int, which: int) -> list[tuple[int, int]]:
    start = 0 if which == 0 else 1
    return [(q, q + 1) for q in range(start, n_qubits - 1, 2)]


def _rotation_layer_gates(ansatz: HeAnsatz, params: np.ndarray) -> list[Gate]:
    gates = []
    k = ansatz.params_per_qubit
    for q in range(ansatz.n_qubits):
        chunk = params[k * q: k * (q + 1)]
        if ansatz.rotation == "zx":
            gates.append(Gate.rx(q, chunk[0]))
            gates.append(Gate.rz(q, chunk[1]))
        else:
            gates.append(Gate.rz(q, chunk[0]))
            gates.append(Gate.ry(q, chunk[1]))
            gates.append(Gate.rz(q, chunk[2]))
    return gates


def build_he_circuit(ansatz: HeAnsatz, theta) -> Circuit:
    """Layered circuit on |0...0>: rotations and fixed CNOT entanglers.

    merged:   [rotations, ent1, ent2] x L, then a final rotation layer;
    splitted: [rotations, ent1, rotations, ent2] x L, then a final layer.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_params,):
        raise ValueError(f"expected {ansatz.n_params} parameters, got {theta.shape}")
    per_layer = ansatz.params_per_qubit * ansatz.n_qubits
    chunks = iter(
        theta[i * per_layer: (i + 1) * per_layer] for i in range(ansatz.n_rotation_layers)
    )
    circuit = Circuit(ansatz.n_qubits)
    ent1 = [Gate.cnot(c, t) for c, t in _entangler_pairs(ansatz.n_qubits, 0)]
    ent2 = [Gate.cnot(c, t) for c, t in _entangler_pairs(ansatz.n_qubits, 1)]
    for _ in range(ansatz.layers):
        circuit.extend(_rotation_layer_gates(ansatz, next(chunks)))
        circuit.extend(ent1)
        if ansatz.layout == "splitted":
            circuit.extend(_rotation_layer_gates(ansatz, next(chunks)))
        circuit.extend(ent2)
    circuit.extend(_rotation_layer_gates(ansatz, next(chunks)))
    return circuit
