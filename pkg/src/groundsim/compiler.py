"""Compilation of commuting Pauli exponentials into elementary gates.

Two strategies are provided:

* greedy: each exponential exp(-i a P/2) is handled separately with
  single-qubit basis changes (H for X, V for Y), a CNOT parity ladder, and
  one Rz.

* three-step: the whole commuting set is simultaneously diagonalized by a
  Clifford built from {CNOT, H, V} via symplectic elimination over GF(2),
  the diagonal exponentials are realized as a CNOT+Rz phase network whose
  net linear action A is then undone by a CNOT-only synthesis of A^-1.

Both strategies produce circuits whose unitary equals the exponential
product exactly, including global phase (identity strings are folded into
the circuit's explicit global phase; Clifford sign flips are absorbed into
the rotation angles).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString
from .simulator import Circuit, Gate


@dataclass
class ExponentialGroup:
    """Terms (P_n, alpha_n) of exp(-i sum_n alpha_n P_n / 2), mutually commuting."""

    n_qubits: int
    terms: list[tuple[PauliString, float]]

    def __post_init__(self):
        for s, _ in self.terms:
            if s.n_qubits != self.n_qubits:
                raise ValueError("string size does not match group")

    def is_commuting(self) -> bool:
        strings = [s for s, _ in self.terms]
        return all(
            a.commutes_with(b) for i, a in enumerate(strings) for b in strings[i + 1:]
        )

    def require_commuting(self):
        if not self.is_commuting():
            raise ValueError("group contains non-commuting strings")


@dataclass(frozen=True)
class GateCounts:
    single_qubit: int
    cnot: int

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(self.single_qubit + other.single_qubit, self.cnot + other.cnot)

    def scaled(self, factor: int) -> "GateCounts":
        return GateCounts(self.single_qubit * factor, self.cnot * factor)


def gate_counts(circuit: Circuit) -> GateCounts:
    """Exact single-qubit / CNOT tallies; rejects non-elementary gates."""
    sq = cx = 0
    for g in circuit.gates:
        if g.name == "cnot":
            cx += 1
        elif g.name == "controlled":
            raise ValueError("circuit contains a non-elementary controlled gate")
        else:
            sq += 1
    return GateCounts(sq, cx)


class LinearMapGF2:
    """Invertible linear map over GF(2), rows indexed by output bit."""

    def __init__(self, matrix):
        mat = np.array(matrix, dtype=np.uint8) % 2
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("matrix must be square")
        self.n = mat.shape[0]
        self.matrix = mat
        if self.inverse_matrix() is None:
            raise ValueError("matrix is singular over GF(2)")

    @classmethod
    def identity(cls, n: int) -> "LinearMapGF2":
        return cls(np.eye(n, dtype=np.uint8))

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(self.n, dtype=np.uint8)))

    def inverse_matrix(self) -> np.ndarray | None:
        n = self.n
        work = np.concatenate([self.matrix.copy(), np.eye(n, dtype=np.uint8)], axis=1)
        row = 0
        for col in range(n):
            pivots = np.nonzero(work[row:, col])[0]
            if pivots.size == 0:
                return None
            p = row + int(pivots[0])
            if p != row:
                work[[row, p]] = work[[p, row]]
            for r in range(n):
                if r != row and work[r, col]:
                    work[r] ^= work[row]
            row += 1
        return work[:, n:].copy()

    def apply(self, bits: int) -> int:
        """Apply to a basis index (bit q of the index = input bit q)."""
        out = 0
        for r in range(self.n):
            acc = 0
            for c in range(self.n):
                if self.matrix[r, c]:
                    acc ^= (bits >> c) & 1
            out |= acc << r
        return out

    def inverse(self) -> "LinearMapGF2":
        return LinearMapGF2(self.inverse_matrix())


# ---------------------------------------------------------------------------
# Greedy strategy
# ---------------------------------------------------------------------------

def _single_exponential_gates(string: PauliString, angle: float, circuit: Circuit):
    if string.is_identity:
        circuit.global_phase += -0.5 * angle
        return
    support = string.support()
    enter = []
    for q in support:
        ch = string.char_at(q)
        if ch == "X":
            enter.append(Gate.h(q))
        elif ch == "Y":
            enter.append(Gate.v(q))
    circuit.extend(enter)
    ladder = [Gate.cnot(support[i], support[i + 1]) for i in range(len(support) - 1)]
    circuit.extend(ladder)
    circuit.append(Gate.rz(support[-1], angle))
    circuit.extend(reversed(ladder))
    circuit.extend(g.adjoint() for g in reversed(enter))


def compile_greedy(group: ExponentialGroup) -> Circuit:
    """Compile each exponential separately: Cliffords, CNOT ladder, Rz, undo."""
    circuit = Circuit(group.n_qubits)
    for string, angle in group.terms:
        _single_exponential_gates(string, angle, circuit)
    return circuit


# ---------------------------------------------------------------------------
# Simultaneous diagonalization (three-step, first stage)
# ---------------------------------------------------------------------------

class _Tableau:
    """Symplectic tableau of the group's strings plus a scratch generator copy.

    Recorded gates g are applied as Heisenberg conjugations P -> g P g+ to
    every row (with sign tracking for the real rows); row sweeps are allowed
    on the generator copy only, since they just re-pick a generating set.
    """

    def __init__(self, strings: list[PauliString], n: int):
        k = len(strings)
        self.n = n
        self.x = np.zeros((k, n), dtype=np.uint8)
        self.z = np.zeros((k, n), dtype=np.uint8)
        self.sign = np.zeros(k, dtype=np.uint8)
        for i, s in enumerate(strings):
            for q in range(n):
                self.x[i, q] = s.x_mask >> q & 1
                self.z[i, q] = s.z_mask >> q & 1
        self.gx = self.x.copy()
        self.gz = self.z.copy()
        self.gates: list[Gate] = []

    # Conjugation rules: H swaps X/Z (sign flips on Y); V maps Y->Z, Z->-Y
    # (x ^= z, sign flips where the qubit held Z); CNOT follows the standard
    # stabilizer update with sign x_c & z_t & (x_t ^ z_c ^ 1).

    def h(self, q: int):
        self.sign ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()
        self.gx[:, q], self.gz[:, q] = self.gz[:, q].copy(), self.gx[:, q].copy()
        self.gates.append(Gate.h(q))

    def v(self, q: int):
        self.sign ^= (1 - self.x[:, q]) & self.z[:, q]
        self.x[:, q] ^= self.z[:, q]
        self.gx[:, q] ^= self.gz[:, q]
        self.gates.append(Gate.v(q))

    def cnot(self, c: int, t: int):
        self.sign ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]
        self.gx[:, t] ^= self.gx[:, c]
        self.gz[:, c] ^= self.gz[:, t]
        self.gates.append(Gate.cnot(c, t))

    def cz(self, a: int, b: int):
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def sweep(self, i: int, r: int):
        self.gx[i] ^= self.gx[r]
        self.gz[i] ^= self.gz[r]


def _eliminate_x_block(tab: _Tableau):
    """Drive the X block of the tableau to zero with {H, V, CNOT} conjugations."""
    k = tab.gx.shape[0]
    # Echelon pass over the generator copy: each row is swept by earlier
    # pivots; whatever X support remains defines a new pivot.
    pivots: list[tuple[int, int]] = []
    for i in range(k):
        for r, q in pivots:
            if tab.gx[i, q]:
                tab.sweep(i, r)
        cols = np.nonzero(tab.gx[i])[0]
        if cols.size:
            pivots.append((i, int(cols[0])))
    # Upward sweeps make the pivot block the identity.
    for j in range(len(pivots) - 1, -1, -1):
        rj, qj = pivots[j]
        for ri, _ in pivots[:j]:
            if tab.gx[ri, qj]:
                tab.sweep(ri, rj)
    # CNOTs clear the off-pivot X columns; with the pivot block equal to the
    # identity each CNOT touches exactly one generator row.
    for rj, qj in pivots:
        for qp in np.nonzero(tab.gx[rj])[0]:
            if int(qp) != qj:
                tab.cnot(qj, int(qp))
    # Commutation forces the Z entries at pivot columns of pivot rows to form
    # a symmetric matrix; CZ pairs clear its off-diagonal part.
    for a in range(len(pivots)):
        ra, qa = pivots[a]
        for b in range(a + 1, len(pivots)):
            rb, qb = pivots[b]
            if tab.gz[ra, qb]:
                tab.cz(qa, qb)
    # Single-qubit rotations finish each pivot: X -> Z via H, Y -> Z via V.
    for rj, qj in pivots:
        if tab.gz[rj, qj]:
            tab.v(qj)
        else:
            tab.h(qj)


def diagonalize_group(group: ExponentialGroup):
    """Simultaneously diagonalize a commuting group.

    Returns (clifford, diag_terms).  The clifford circuit C (gates from
    {CNOT, H, V} only) conjugates every input string to +/- a Z/I-only
    string: U_C P U_C+ = s * P_z; the sign s is absorbed into the returned
    angles, so exp(-i sum a_n P_n / 2) = U_C+ exp(-i sum b_m P^z_m / 2) U_C.
    """
    group.require_commuting()
    n = group.n_qubits
    strings = [s for s, _ in group.terms]
    tab = _Tableau(strings, n)
    _eliminate_x_block(tab)
    if tab.x.any():
        raise AssertionError("X block not eliminated; diagonalization bug")
    diag_terms = []
    for i, (_, angle) in enumerate(group.terms):
        z_mask = 0
        for q in range(n):
            if tab.z[i, q]:
                z_mask |= 1 << q
        sgn = -1.0 if tab.sign[i] else 1.0
        diag_terms.append((PauliString(n, 0, z_mask), sgn * angle))
    return Circuit(n, list(tab.gates)), diag_terms


# ---------------------------------------------------------------------------
# Phase network over Z/I strings
# ---------------------------------------------------------------------------

def _solve_gf2(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve mat @ u = rhs over GF(2) for invertible mat."""
    n = mat.shape[0]
    work = np.concatenate([mat.copy() % 2, (rhs % 2).reshape(n, 1)], axis=1)
    piv_cols = []
    row = 0
    for col in range(n):
        hits = np.nonzero(work[row:, col])[0]
        if hits.size == 0:
            continue
        p = row + int(hits[0])
        if p != row:
            work[[row, p]] = work[[p, row]]
        for r in range(n):
            if r != row and work[r, col]:
                work[r] ^= work[row]
        piv_cols.append(col)
        row += 1
    if row < n:
        raise ValueError("singular system")
    u = np.zeros(n, dtype=np.uint8)
    for r, col in enumerate(piv_cols):
        u[col] = work[r, n]
    return u


def synthesize_phase_network(diag_terms, n_qubits: int | None = None):
    """CNOT+Rz circuit applying Rz(beta_m) on each term's parity exactly once.

    Terms are processed in canonical (sorted bit pattern) order.  The wires'
    final linear state is returned as the residual map A: the circuit acts on
    basis states as |q> -> phases * |A q>.
    """
    terms = list(diag_terms)
    if n_qubits is None:
        if not terms:
            raise ValueError("cannot infer qubit count from an empty term list")
        n_qubits = terms[0][0].n_qubits
    circuit = Circuit(n_qubits)
    state = np.eye(n_qubits, dtype=np.uint8)  # state[w] = parity held by wire w
    order = sorted(range(len(terms)), key=lambda i: terms[i][0].z_mask)
    for i in order:
        string, angle = terms[i]
        if not string.is_diagonal:
            raise ValueError(f"non-diagonal string {string.label()} in phase network")
        if string.is_identity:
            circuit.global_phase += -0.5 * angle
            continue
        y = np.array([string.z_mask >> q & 1 for q in range(n_qubits)], dtype=np.uint8)
        # Wires whose current parities XOR to the target parity.
        u = _solve_gf2(state.T.copy(), y)
        wires = [int(w) for w in np.nonzero(u)[0]]
        target = wires[-1]
        for c in wires[:-1]:
            circuit.append(Gate.cnot(c, target))
            state[target] ^= state[c]
        circuit.append(Gate.rz(target, angle))
    return circuit, LinearMapGF2(state)


# ---------------------------------------------------------------------------
# CNOT-only synthesis of a linear map (inverse network)
# ---------------------------------------------------------------------------

def _plain_elimination_ops(mat: np.ndarray) -> list[tuple[int, int]]:
    """Row ops (c, t): row_t ^= row_c reducing mat to the identity."""
    m = mat.copy()
    n = m.shape[0]
    ops = []
    for col in range(n):
        if not m[col, col]:
            rows = [r for r in range(col + 1, n) if m[r, col]]
            if not rows:
                raise ValueError("singular matrix")
            ops.append((rows[0], col))
            m[col] ^= m[rows[0]]
        for r in range(n):
            if r != col and m[r, col]:
                ops.append((col, r))
                m[r] ^= m[col]
    return ops


def _pmh_lower_ops(mat: np.ndarray, block: int) -> list[tuple[int, int]]:
    """Patel-Markov-Hayes lower elimination: reduce to upper triangular in place."""
    m = mat
    n = m.shape[0]
    ops = []
    n_sections = (n + block - 1) // block
    for sec in range(n_sections):
        lo = sec * block
        hi = min(lo + block, n)
        # Merge rows with duplicate sub-patterns in this column section.
        seen: dict[tuple, int] = {}
        for row in range(lo, n):
            pattern = tuple(m[row, lo:hi])
            if not any(pattern):
                continue
            if pattern in seen and row > hi - 1:
                ops.append((seen[pattern], row))
                m[row] ^= m[seen[pattern]]
            elif pattern not in seen:
                seen[pattern] = row
        for col in range(lo, hi):
            if not m[col, col]:
                rows = [r for r in range(col + 1, n) if m[r, col]]
                if not rows:
                    raise ValueError("singular matrix")
                ops.append((rows[0], col))
                m[col] ^= m[rows[0]]
            for row in range(col + 1, n):
                if m[row, col]:
                    ops.append((col, row))
                    m[row] ^= m[col]
    return ops


def _cnot_ops_for_matrix(mat: np.ndarray, use_blocks: bool) -> list[tuple[int, int]]:
    """CNOT list [(c, t), ...] whose basis-state action realizes x -> mat @ x."""
    if not use_blocks:
        ops = _plain_elimination_ops(mat.copy())
        # E_k ... E_1 M = I  =>  M = E_1 ... E_k; rightmost factor acts first.
        return [(c, t) for (c, t) in reversed(ops)]
    n = mat.shape[0]
    block = max(1, round(math.log2(n) / 2))
    work = mat.copy()
    ops_lower = _pmh_lower_ops(work, block)  # work is now upper triangular
    work_t = work.T.copy()
    ops_upper = _pmh_lower_ops(work_t, block)  # reduces U^T to the identity
    # M = L_1..L_m U and U = K~_p..K~_1 with transposed ops swapping (c, t);
    # the rightmost matrix factor is the first circuit gate.
    return [(t, c) for (c, t) in ops_upper] + list(reversed(ops_lower))


def synthesize_linear_inverse(linmap: LinearMapGF2) -> Circuit:
    """CNOT-only circuit acting on basis states as b -> A^-1 b."""
    target = linmap.inverse_matrix()
    if target is None:
        raise ValueError("singular map cannot be inverted")
    n = linmap.n
    if np.array_equal(target, np.eye(n, dtype=np.uint8)):
        return Circuit(n)
    ops = _cnot_ops_for_matrix(target, use_blocks=n >= 8)
    circuit = Circuit(n)
    for c, t in ops:
        circuit.append(Gate.cnot(c, t))
    return circuit


# ---------------------------------------------------------------------------
# Three-step strategy
# ---------------------------------------------------------------------------

def compile_three_step(group: ExponentialGroup) -> Circuit:
    """Simultaneous diagonalization, phase network, A^-1 network, undo."""
    clifford, diag_terms = diagonalize_group(group)
    phase_net, residual = synthesize_phase_network(diag_terms, group.n_qubits)
    inverse_net = synthesize_linear_inverse(residual)
    out = clifford.concatenated(phase_net).concatenated(inverse_net)
    return out.concatenated(clifford.inverse())


def compile_group(group: ExponentialGroup, strategy: str) -> Circuit:
    if strategy == "greedy":
        return compile_greedy(group)
    if strategy == "three-step":
        return compile_three_step(group)
    raise ValueError(f"unknown strategy {strategy!r} (use 'greedy' or 'three-step')")


# ---------------------------------------------------------------------------
# Controlled circuits
# ---------------------------------------------------------------------------

def _zyz_angles(mat: np.ndarray):
    """U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta) for a 2x2 unitary."""
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    alpha = 0.5 * float(np.angle(det))
    su = mat * np.exp(-1j * alpha)
    gamma = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[0, 0]) > 1e-12 and abs(su[1, 0]) > 1e-12:
        sum_bd = -2.0 * float(np.angle(su[0, 0]))
        dif_bd = 2.0 * float(np.angle(su[1, 0]))
        beta = 0.5 * (sum_bd + dif_bd)
        delta = 0.5 * (sum_bd - dif_bd)
    elif abs(su[0, 0]) > 1e-12:
        beta = -2.0 * float(np.angle(su[0, 0]))
        delta = 0.0
    else:
        beta = 2.0 * float(np.angle(su[1, 0]))
        delta = 0.0
    return alpha, beta, gamma, delta


def _controlled_single_qubit(gate: Gate, control: int) -> list[Gate]:
    """Barenco-style ABC construction: 2 CNOTs plus rotations and one phase."""
    q = gate.qubits[0]
    alpha, beta, gamma, delta = _zyz_angles(gate.matrix())
    gates: list[Gate] = []
    # C = Rz((delta - beta)/2)
    gates.append(Gate.rz(q, 0.5 * (delta - beta)))
    gates.append(Gate.cnot(control, q))
    # B = Ry(-gamma/2) Rz(-(delta + beta)/2)
    gates.append(Gate.rz(q, -0.5 * (delta + beta)))
    gates.append(Gate.ry(q, -0.5 * gamma))
    gates.append(Gate.cnot(control, q))
    # A = Rz(beta) Ry(gamma/2)
    gates.append(Gate.ry(q, 0.5 * gamma))
    gates.append(Gate.rz(q, beta))
    if abs(alpha) > 0.0:
        gates.append(Gate.phase(control, alpha))
    return gates


def _toffoli(a: int, b: int, t: int) -> list[Gate]:
    """Standard 6-CNOT Toffoli with T = Phase(pi/4)."""
    T = math.pi / 4.0
    return [
        Gate.h(t),
        Gate.cnot(b, t),
        Gate.phase(t, -T),
        Gate.cnot(a, t),
        Gate.phase(t, T),
        Gate.cnot(b, t),
        Gate.phase(t, -T),
        Gate.cnot(a, t),
        Gate.phase(b, T),
        Gate.phase(t, T),
        Gate.h(t),
        Gate.cnot(a, b),
        Gate.phase(a, T),
        Gate.phase(b, -T),
        Gate.cnot(a, b),
    ]


def make_controlled(circuit: Circuit) -> Circuit:
    """Add one ancilla control (the new highest qubit index).

    Output uses only supported elementary gates: controlled-Rz becomes two
    Rz and two CNOTs, controlled-CNOT a fixed Toffoli decomposition, other
    controlled single-qubit gates the standard two-CNOT construction, and
    the source circuit's global phase a Phase gate on the control.
    """
    n = circuit.n_qubits
    control = n
    out = Circuit(n + 1)
    for g in circuit.gates:
        if g.name == "x":
            out.append(Gate.cnot(control, g.qubits[0]))
        elif g.name == "cnot":
            out.extend(_toffoli(control, g.qubits[0], g.qubits[1]))
        elif g.name == "rz":
            q = g.qubits[0]
            out.append(Gate.rz(q, 0.5 * g.angle))
            out.append(Gate.cnot(control, q))
            out.append(Gate.rz(q, -0.5 * g.angle))
            out.append(Gate.cnot(control, q))
        elif g.name == "phase":
            q = g.qubits[0]
            out.append(Gate.phase(control, 0.5 * g.angle))
            out.append(Gate.phase(q, 0.5 * g.angle))
            out.append(Gate.cnot(control, q))
            out.append(Gate.phase(q, -0.5 * g.angle))
            out.append(Gate.cnot(control, q))
        elif g.name in ("h", "v", "rx", "ry"):
            out.extend(_controlled_single_qubit(g, control))
        else:
            raise ValueError(f"unsupported gate kind {g.name!r} in make_controlled")
    if circuit.global_phase != 0.0:
        out.append(Gate.phase(control, circuit.global_phase))
    return out


# ---------------------------------------------------------------------------
# Circuit text format
# ---------------------------------------------------------------------------

_GATE_TEXT = {"rz": "RZ", "rx": "RX", "ry": "RY", "h": "H", "v": "V", "x": "X",
              "phase": "P", "cnot": "CNOT"}


def circuit_to_text(circuit: Circuit) -> str:
    """Line-per-gate format: 'RZ <q> <theta>', 'CNOT <c> <t>', 'H <q>', ..."""
    lines = [f"QUBITS {circuit.n_qubits}"]
    if circuit.global_phase != 0.0:
        lines.append(f"GLOBALPHASE {circuit.global_phase:.17g}")
    for g in circuit.gates:
        if g.name == "controlled":
            raise ValueError("text format covers elementary gates only")
        name = _GATE_TEXT[g.name]
        if g.angle is not None:
            lines.append(f"{name} {g.qubits[0]} {g.angle:.17g}")
        else:
            lines.append(f"{name} " + " ".join(str(q) for q in g.qubits))
    return "\n".join(lines) + "\n"
