"""Shot-sampled expectation values over commuting groups."""
import numpy as np
import pytest

from groundsim.measurement import sampled_expectation
from groundsim.pauli import PauliString, PauliTerm, QubitHamiltonian
from groundsim.simulator import StateVector, expectation, prepare_basis_state


def random_problem(n, k, rng):
    terms = [
        PauliTerm(float(rng.uniform(-1, 1)),
                  PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))))
        for _ in range(k)
    ]
    ham = QubitHamiltonian(n, terms)
    amp = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return ham, StateVector(n, amp / np.linalg.norm(amp))


def test_eigenstate_is_exact_at_any_shots():
    ham = QubitHamiltonian(1, [PauliTerm(0.8, PauliString.from_label("Z"))])
    state = prepare_basis_state([0])
    assert sampled_expectation(state, ham, shots=16, seed=0) == pytest.approx(0.8)


def test_zero_shots_falls_back_to_exact(rng):
    ham, state = random_problem(3, 6, rng)
    assert sampled_expectation(state, ham, shots=0) == pytest.approx(
        expectation(state, ham)
    )


def test_converges_to_exact(rng):
    ham, state = random_problem(3, 6, rng)
    exact = expectation(state, ham)
    estimates = [
        sampled_expectation(state, ham, shots=40000, seed=s) for s in range(5)
    ]
    weight = sum(abs(t.coeff) for t in ham.terms)
    assert abs(np.mean(estimates) - exact) < 0.05 * max(weight, 1.0)


def test_deterministic_given_seed(rng):
    ham, state = random_problem(4, 8, rng)
    a = sampled_expectation(state, ham, shots=500, seed=42)
    b = sampled_expectation(state, ham, shots=500, seed=42)
    assert a == b
