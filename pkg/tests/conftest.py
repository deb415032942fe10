"""Shared test fixtures and independent dense oracles.

The dense Pauli matrices here are built from explicit 2x2 blocks with
np.kron, independently of the simulator's bit-twiddling implementations, so
they can serve as oracles for it.
"""
import numpy as np
import pytest
import scipy.linalg

from groundsim.compiler import ExponentialGroup
from groundsim.pauli import PauliString

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_1Q = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron_dense(label: str) -> np.ndarray:
    """Dense matrix of a Pauli label; leftmost character is the highest qubit."""
    out = np.array([[1.0 + 0.0j]])
    for ch in label:
        out = np.kron(out, PAULI_1Q[ch])
    return out


def string_dense(string: PauliString) -> np.ndarray:
    return kron_dense(string.label())


def ham_dense_oracle(ham) -> np.ndarray:
    dim = 1 << ham.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in ham.terms:
        out += t.coeff * string_dense(t.string)
    return out


def exp_product_dense(group: ExponentialGroup) -> np.ndarray:
    """Reference unitary prod_n exp(-i alpha_n P_n / 2), leftmost factor last."""
    dim = 1 << group.n_qubits
    out = np.eye(dim, dtype=complex)
    for s, a in group.terms:
        out = scipy.linalg.expm(-0.5j * a * string_dense(s)) @ out
    return out


def random_commuting_group(n: int, k: int, rng, max_tries: int = 5000) -> ExponentialGroup:
    strings = []
    tries = 0
    while len(strings) < k and tries < max_tries:
        tries += 1
        s = PauliString(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
        if all(s.commutes_with(t) for t in strings):
            strings.append(s)
    return ExponentialGroup(n, [(s, float(rng.uniform(-2.0, 2.0))) for s in strings])


def unitary_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    dim = a.shape[0]
    tr = np.trace(a.conj().T @ b) / dim
    if abs(abs(tr) - 1.0) > tol:
        return False
    phase = tr / abs(tr)
    return bool(np.max(np.abs(a * phase - b)) < max(tol, 1e-9))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
