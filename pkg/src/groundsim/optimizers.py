"""Classical optimizers for the variational loop.

Adam follows the update rule with bias correction folded into the
moving-average recursion coefficients (beta - beta^n)/(1 - beta^n) and
(1 - beta)/(1 - beta^n), with theta <- theta - eta * m / (sqrt(v) + eps).

QNG solves F * dtheta = -eta * grad E in the Tikhonov-regularized
least-squares sense, dtheta = -eta (F^T F + lambda I)^-1 F^T grad E, with
lambda picked at the corner (maximum Menger curvature) of the log-log
L-curve over a fixed lambda grid.

Gradients and the Fubini-Study metric are evaluated exactly from derivative
states (adjoint method); a parameter-shift path is provided for ansatze made
of single rotation gates and must agree with the adjoint values.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .ansatz import DuccAnsatz, HeAnsatz, build_he_circuit
from .pauli import QubitHamiltonian
from .simulator import (
    StateVector,
    apply_gate,
    apply_hamiltonian,
    apply_pauli_exponential,
    apply_pauli_string,
    expectation,
)

DEFAULT_LAMBDA_GRID = np.logspace(-8.0, 2.0, 25)


# ---------------------------------------------------------------------------
# Ansatz programs: ordered one-parameter blocks U_k(theta_k) = exp(theta_k G_k)
# ---------------------------------------------------------------------------

class _DuccProgram:
    """dUCC ansatz as parameter blocks; block k is the k-th excitation group."""

    supports_parameter_shift = False

    def __init__(self, ansatz: DuccAnsatz):
        self.ansatz = ansatz
        self.n_params = ansatz.n_params
        self.n_qubits = ansatz.n_qubits

    def initial_state(self) -> StateVector:
        return self.ansatz.reference_state()

    def apply_block(self, state: StateVector, k: int, theta_k: float) -> StateVector:
        for string, base in self.ansatz.groups[k].terms:
            state = apply_pauli_exponential(state, string, base * theta_k)
        return state

    def apply_block_adjoint(self, state: StateVector, k: int, theta_k: float) -> StateVector:
        for string, base in reversed(self.ansatz.groups[k].terms):
            state = apply_pauli_exponential(state, string, -base * theta_k)
        return state

    def apply_generator(self, state: StateVector, k: int) -> StateVector:
        """G_k = -(i/2) sum_n alpha_n P_n applied to the state."""
        out = np.zeros_like(state.amplitudes)
        for string, base in self.ansatz.groups[k].terms:
            out += -0.5j * base * apply_pauli_string(state, string).amplitudes
        return StateVector(state.n_qubits, out)


class _HeProgram:
    """HE ansatz as blocks: any fixed entangler gates, then one rotation."""

    supports_parameter_shift = True

    def __init__(self, ansatz: HeAnsatz):
        self.ansatz = ansatz
        self.n_params = ansatz.n_params
        self.n_qubits = ansatz.n_qubits
        circuit = build_he_circuit(ansatz, np.zeros(ansatz.n_params))
        self._blocks: list[tuple[list, object]] = []
        fixed: list = []
        for gate in circuit.gates:
            if gate.name == "cnot":
                fixed.append(gate)
            else:
                self._blocks.append((fixed, gate))
                fixed = []
        if fixed:
            raise AssertionError("HE circuit must end with a rotation layer")
        if len(self._blocks) != self.n_params:
            raise AssertionError("block/parameter count mismatch")

    def initial_state(self) -> StateVector:
        return StateVector.zero(self.n_qubits)

    def apply_block(self, state: StateVector, k: int, theta_k: float) -> StateVector:
        fixed, rot = self._blocks[k]
        for g in fixed:
            state = apply_gate(state, g)
        return apply_gate(state, replace(rot, angle=float(theta_k)))

    def apply_block_adjoint(self, state: StateVector, k: int, theta_k: float) -> StateVector:
        fixed, rot = self._blocks[k]
        state = apply_gate(state, replace(rot, angle=-float(theta_k)))
        for g in reversed(fixed):
            state = apply_gate(state, g)  # CNOT is self-inverse
        return state

    def apply_generator(self, state: StateVector, k: int) -> StateVector:
        _, rot = self._blocks[k]
        axis = {"rx": "X", "ry": "Y", "rz": "Z"}[rot.name]
        from .pauli import PauliString

        string = PauliString.from_ops(self.n_qubits, {rot.qubits[0]: axis})
        p_psi = apply_pauli_string(state, string)
        return StateVector(state.n_qubits, -0.5j * p_psi.amplitudes)


def as_program(ansatz):
    if isinstance(ansatz, DuccAnsatz):
        return _DuccProgram(ansatz)
    if isinstance(ansatz, HeAnsatz):
        return _HeProgram(ansatz)
    if hasattr(ansatz, "apply_block"):
        return ansatz
    raise TypeError(f"cannot build an ansatz program from {type(ansatz)!r}")


def ansatz_state(ansatz, theta) -> StateVector:
    program = as_program(ansatz)
    theta = np.asarray(theta, dtype=float)
    state = program.initial_state()
    for k in range(program.n_params):
        state = program.apply_block(state, k, theta[k])
    return state


# ---------------------------------------------------------------------------
# Gradient and metric
# ---------------------------------------------------------------------------

@dataclass
class GradientReport:
    gradient: np.ndarray
    metric: np.ndarray | None = None


def energy_gradient(ansatz, theta, ham: QubitHamiltonian,
                    with_metric: bool = False) -> GradientReport:
    """Exact dE/dtheta by the adjoint method (one forward, one backward sweep)."""
    program = as_program(ansatz)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (program.n_params,):
        raise ValueError("parameter count mismatch")
    psi = ansatz_state(ansatz, theta)
    lam = apply_hamiltonian(psi, ham)
    a = lam
    b = psi
    grads = np.zeros(program.n_params)
    for k in range(program.n_params - 1, -1, -1):
        gb = program.apply_generator(b, k)
        grads[k] = 2.0 * float(np.vdot(a.amplitudes, gb.amplitudes).real)
        a = program.apply_block_adjoint(a, k, theta[k])
        b = program.apply_block_adjoint(b, k, theta[k])
    metric = fubini_study_metric(ansatz, theta) if with_metric else None
    return GradientReport(gradient=grads, metric=metric)


def _derivative_states(program, theta):
    forward = [program.initial_state()]
    for k in range(program.n_params):
        forward.append(program.apply_block(forward[-1], k, theta[k]))
    psi = forward[-1]
    derivs = []
    for k in range(program.n_params):
        d = program.apply_generator(forward[k + 1], k)
        for m in range(k + 1, program.n_params):
            d = program.apply_block(d, m, theta[m])
        derivs.append(d.amplitudes)
    return psi, derivs


def fubini_study_metric(ansatz, theta) -> np.ndarray:
    """F_ij = Re<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>, exactly."""
    program = as_program(ansatz)
    theta = np.asarray(theta, dtype=float)
    psi, derivs = _derivative_states(program, theta)
    L = program.n_params
    D = np.array(derivs).T  # columns are derivative states
    gram = D.conj().T @ D
    berry = D.conj().T @ psi.amplitudes
    F = gram.real - np.real(np.outer(berry.conj(), berry))
    F = 0.5 * (F + F.T)
    if L and np.max(np.abs(gram.real - gram.real.T)) > 1e-10:
        raise AssertionError("metric asymmetry above tolerance")
    return F


def parameter_shift_gradient(ansatz, theta, ham: QubitHamiltonian) -> np.ndarray:
    """(E(theta + pi/2 e_k) - E(theta - pi/2 e_k)) / 2 for rotation-gate ansatze."""
    program = as_program(ansatz)
    if not program.supports_parameter_shift:
        raise ValueError("parameter-shift rule requires single-rotation parameters")
    theta = np.asarray(theta, dtype=float)
    grads = np.zeros(program.n_params)
    for k in range(program.n_params):
        shifted = theta.copy()
        shifted[k] += np.pi / 2.0
        e_plus = expectation(ansatz_state(ansatz, shifted), ham)
        shifted[k] -= np.pi
        e_minus = expectation(ansatz_state(ansatz, shifted), ham)
        grads[k] = 0.5 * (e_plus - e_minus)
    return grads


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """Step counter, moment vectors, and hyperparameters."""

    n: int
    m: np.ndarray
    v: np.ndarray
    eta: float = 0.05
    epsilon: float = 1e-8
    beta1: float = 0.9
    beta2: float = 0.999

    @classmethod
    def initial(cls, dim: int, eta: float = 0.05, epsilon: float = 1e-8,
                beta1: float = 0.9, beta2: float = 0.999) -> "AdamState":
        return cls(0, np.zeros(dim), np.zeros(dim), eta, epsilon, beta1, beta2)


def adam_step(theta, gradient, state: AdamState):
    """One Adam update; bias correction is folded into the recursions."""
    theta = np.asarray(theta, dtype=float)
    g = np.asarray(gradient, dtype=float)
    if theta.shape != g.shape or theta.shape != state.m.shape:
        raise ValueError("dimension mismatch")
    n = state.n + 1
    b1, b2 = state.beta1, state.beta2
    m = ((b1 - b1 ** n) * state.m + (1.0 - b1) * g) / (1.0 - b1 ** n)
    v = ((b2 - b2 ** n) * state.v + (1.0 - b2) * g * g) / (1.0 - b2 ** n)
    theta_next = theta - state.eta / (np.sqrt(v) + state.epsilon) * m
    new_state = AdamState(n, m, v, state.eta, state.epsilon, b1, b2)
    return theta_next, new_state


# ---------------------------------------------------------------------------
# Quantum natural gradient
# ---------------------------------------------------------------------------

@dataclass
class QngState:
    eta: float = 0.05
    lambda_grid: np.ndarray = field(default_factory=lambda: DEFAULT_LAMBDA_GRID.copy())
    last_lambda: float | None = None
    lambda_history: list[float] = field(default_factory=list)


def _menger_curvature(p1, p2, p3) -> float:
    a = np.hypot(p2[0] - p1[0], p2[1] - p1[1])
    b = np.hypot(p3[0] - p2[0], p3[1] - p2[1])
    c = np.hypot(p3[0] - p1[0], p3[1] - p1[1])
    if a < 1e-300 or b < 1e-300 or c < 1e-300:
        return 0.0
    cross = (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0])
    return 2.0 * abs(cross) / (a * b * c)


def tikhonov_curve(F: np.ndarray, g: np.ndarray, eta: float, lambda_grid):
    """Residual and solution norms of the regularized problem along the grid."""
    vals, vecs = np.linalg.eigh(F)
    gt = vecs.T @ g
    residuals = []
    norms = []
    for lam in lambda_grid:
        denom = vals * vals + lam
        residuals.append(eta * float(np.linalg.norm(lam / denom * gt)))
        norms.append(eta * float(np.linalg.norm(vals / denom * gt)))
    return np.array(residuals), np.array(norms)


def select_lambda(F: np.ndarray, g: np.ndarray, eta: float, lambda_grid) -> float:
    """Maximum-Menger-curvature point of the log-log L-curve."""
    grid = np.asarray(lambda_grid, dtype=float)
    residuals, norms = tikhonov_curve(F, g, eta, grid)
    floor = 1e-300
    pts = np.stack(
        [np.log10(np.maximum(residuals, floor)), np.log10(np.maximum(norms, floor))],
        axis=1,
    )
    best_idx = 0
    best_curv = -1.0
    for i in range(1, len(grid) - 1):
        curv = _menger_curvature(pts[i - 1], pts[i], pts[i + 1])
        if curv > best_curv:
            best_curv = curv
            best_idx = i
    return float(grid[best_idx])


def qng_step(theta, gradient, F, state: QngState):
    """Tikhonov-regularized natural-gradient update.

    dtheta = argmin ||F dtheta + eta g||^2 + lambda ||dtheta||^2
           = -eta (F^T F + lambda I)^-1 F^T g,   lambda at the L-curve corner.
    """
    theta = np.asarray(theta, dtype=float)
    g = np.asarray(gradient, dtype=float)
    F = np.asarray(F, dtype=float)
    if F.shape != (theta.size, theta.size):
        raise ValueError("metric shape mismatch")
    if theta.size and np.max(np.abs(F - F.T)) > 1e-10:
        raise ValueError("metric must be symmetric")
    new_state = QngState(state.eta, np.asarray(state.lambda_grid, dtype=float),
                         state.last_lambda, list(state.lambda_history))
    if not theta.size or float(np.linalg.norm(g)) == 0.0:
        lam = 0.0
        new_state.last_lambda = lam
        new_state.lambda_history.append(lam)
        return theta.copy(), new_state
    lam = select_lambda(F, g, state.eta, new_state.lambda_grid)
    delta = np.linalg.solve(F.T @ F + lam * np.eye(theta.size), -state.eta * (F.T @ g))
    new_state.last_lambda = lam
    new_state.lambda_history.append(lam)
    return theta + delta, new_state
