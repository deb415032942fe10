"""Iterative phase estimation: Trotter circuits, bit extraction, feedback."""
import math

import numpy as np
import pytest
import scipy.linalg

from conftest import ham_dense_oracle

from groundsim.compiler import make_controlled
from groundsim.ipea import (
    IpeaConfig,
    evolution_powers,
    exact_propagator,
    ipea_bit,
    phase_feedback,
    reconstruct_energy,
    run_ipea,
    trotter_cycle,
    trotterized_evolution,
)
from groundsim.pauli import PauliString, PauliTerm, QubitHamiltonian
from groundsim.simulator import (
    Circuit,
    Gate,
    StateVector,
    apply_circuit,
    apply_gate,
    circuit_unitary,
    hamiltonian_dense,
    prepare_basis_state,
)

TOY_2Q = QubitHamiltonian(2, [
    PauliTerm(0.35, PauliString.from_label("XI")),
    PauliTerm(0.21, PauliString.from_label("ZI")),
    PauliTerm(0.17, PauliString.from_label("ZZ")),
    PauliTerm(-0.4, PauliString.from_label("IZ")),
    PauliTerm(0.1, PauliString.from_label("XX")),
])


def minus_z():
    return QubitHamiltonian(1, [PauliTerm(-1.0, PauliString.from_label("Z"))])


class TestTrotterCircuit:
    def test_single_term_exact_for_any_nt(self):
        gamma, t = 0.9, 1.7
        ham = QubitHamiltonian(1, [PauliTerm(gamma, PauliString.from_label("Z"))])
        ref = scipy.linalg.expm(-1j * ham_dense_oracle(ham) * t)
        for n_t in (1, 3, 7):
            circ = trotterized_evolution(ham, t, n_t)
            assert np.max(np.abs(circuit_unitary(circ) - ref)) < 1e-12

    def test_nt_repetition_structure(self):
        circ1 = trotterized_evolution(TOY_2Q, 1.0, 1)
        circ4 = trotterized_evolution(TOY_2Q, 4.0, 4)  # same tau
        assert len(circ4.gates) == 4 * len(circ1.gates)
        for rep in range(4):
            block = circ4.gates[rep * len(circ1.gates):(rep + 1) * len(circ1.gates)]
            assert block == circ1.gates

    def test_first_order_error_scaling(self):
        t = 1.0
        ham = QubitHamiltonian(1, [
            PauliTerm(1.0, PauliString.from_label("X")),
            PauliTerm(1.0, PauliString.from_label("Z")),
        ])
        exact = scipy.linalg.expm(-1j * ham_dense_oracle(ham) * t)
        nts = np.array([1, 2, 4, 8, 16, 32])
        errors = []
        for n_t in nts:
            u = circuit_unitary(trotterized_evolution(ham, t, int(n_t)))
            errors.append(np.linalg.norm(u - exact, 2))
        slope = np.polyfit(np.log(nts), np.log(errors), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.2)

    def test_identity_term_carried_as_phase(self):
        ham = QubitHamiltonian(1, [
            PauliTerm(0.5, PauliString(1, 0, 0)),
            PauliTerm(0.3, PauliString.from_label("Z")),
        ])
        t = 0.8
        u = circuit_unitary(trotterized_evolution(ham, t, 2))
        ref = scipy.linalg.expm(-1j * ham_dense_oracle(ham) * t)
        assert np.max(np.abs(u - ref)) < 1e-12


class TestIpeaBit:
    def test_exact_eigenstate_deterministic(self):
        # Eigenstate input with aligned phases: ancilla outcome certain.
        ham = minus_z()
        t = 2.0 * math.pi / 4.0
        u = exact_propagator(ham, t)
        state = prepare_basis_state([0])  # ground state of -Z, E0 = -1
        # -(E0 - 0)/4 = 0.25 -> bits b0=0, b1=1; k=1 reads b1 with delta=0
        record, _ = ipea_bit(state, 1, phase_feedback(1, {}, 0.0, t, 2), u @ u)
        assert record.bit == 1
        assert record.prob_one == pytest.approx(1.0, abs=1e-12)

    def test_bit_circuit_matches_fig_circuit(self, rng):
        # Cross-validate the ancilla algebra against an explicit controlled
        # circuit built gate by gate.
        ham = TOY_2Q
        t = 0.9
        k = 2
        delta = 0.37
        cycle = trotter_cycle(ham, t, "three-step")
        u_pow = np.linalg.matrix_power(circuit_unitary(cycle), 2 ** k)
        amp = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        state = StateVector(2, amp / np.linalg.norm(amp))

        record, post = ipea_bit(state.copy(), k, delta, u_pow)

        controlled = make_controlled(cycle)
        # Joint register with the ancilla as qubit 2, initially |0>.
        joint = StateVector(3, np.zeros(8, dtype=complex))
        joint.amplitudes[:4] = state.amplitudes
        joint = apply_gate(joint, Gate.h(2))
        joint = apply_gate(joint, Gate.phase(2, delta))
        for _ in range(2 ** k):
            joint = apply_circuit(joint, controlled)
        joint = apply_gate(joint, Gate.h(2))
        p1 = float(np.sum(np.abs(joint.amplitudes[4:]) ** 2))
        assert record.prob_one == pytest.approx(p1, abs=1e-9)
        branch = joint.amplitudes[4:] if record.bit else joint.amplitudes[:4]
        branch = branch / np.linalg.norm(branch)
        overlap = abs(np.vdot(branch, post.amplitudes))
        assert overlap == pytest.approx(1.0, abs=1e-9)

    def test_sampled_mode_seeded(self):
        ham = minus_z()
        t = 2.0 * math.pi / 4.0
        u = exact_propagator(ham, t)
        state = prepare_basis_state([0])
        rng1 = np.random.default_rng(5)
        rng2 = np.random.default_rng(5)
        r1, _ = ipea_bit(state.copy(), 0, 0.0, u, mode="sampled", shots=64, rng=rng1)
        r2, _ = ipea_bit(state.copy(), 0, 0.0, u, mode="sampled", shots=64, rng=rng2)
        assert r1.bit == r2.bit


class TestRunIpea:
    def test_minus_z_two_bits(self):
        config = IpeaConfig(delta_e=4.0, e_prime=0.0, n_bits=2, n_t=1,
                            initial_bits=(0,), exact_evolution=True)
        result = run_ipea(minus_z(), config)
        assert result.energy == pytest.approx(-1.0, abs=1e-12)
        assert [(r.k, r.bit) for r in result.records] == [(1, 1), (0, 0)]

    def test_single_bit_boundary(self):
        # E0 = E' - deltaE/2 exactly: the single bit must read 1.
        ham = QubitHamiltonian(1, [PauliTerm(-1.0, PauliString.from_label("Z"))])
        config = IpeaConfig(delta_e=2.0, e_prime=0.0, n_bits=1, n_t=1,
                            initial_bits=(0,), exact_evolution=True)
        result = run_ipea(ham, config)
        assert result.records[0].bit == 1
        assert result.energy == pytest.approx(-1.0)

    @pytest.mark.parametrize("n_bits", [8, 16, 24])
    def test_eigenstate_bits_match_feedback_arithmetic(self, n_bits, rng):
        # With exact evolution and an exact eigenstate, the measured bits
        # equal the arithmetic phase-feedback recursion applied to the true
        # energy.
        for n in (2, 3, 4):
            terms = [
                PauliTerm(float(rng.uniform(-0.6, 0.6)),
                          PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))))
                for _ in range(5)
            ]
            ham = QubitHamiltonian(n, terms)
            dense = ham_dense_oracle(ham)
            vals, vecs = np.linalg.eigh(dense)
            e0 = float(vals[0])
            e_prime = e0 + float(rng.uniform(0.05, 0.4))
            delta_e = float(rng.uniform(2.0, 4.0))
            frac = -(e0 - e_prime) / delta_e
            # keep away from the truncation boundary so both paths agree
            if min(frac % 2 ** -n_bits, 2 ** -n_bits - frac % 2 ** -n_bits) < 2 ** -(n_bits + 3):
                continue
            config = IpeaConfig(
                delta_e=delta_e, e_prime=e_prime, n_bits=n_bits, n_t=1,
                initial_state=StateVector(n, vecs[:, 0].astype(complex)),
                exact_evolution=True,
            )
            result = run_ipea(ham, config)
            t = config.time
            bits: dict[int, int] = {}
            for k in range(n_bits - 1, -1, -1):
                delta_k = phase_feedback(k, bits, e_prime, t, n_bits)
                angle = (-e0 * t * 2 ** k + delta_k) / (2.0 * math.pi)
                frac_k = angle - math.floor(angle)
                bits[k] = 1 if 0.25 < frac_k < 0.75 else 0
            assert [r.bit for r in result.records] == [bits[k] for k in range(n_bits - 1, -1, -1)]
            assert abs(result.energy - e0) <= delta_e * 2.0 ** -n_bits

    def test_trotterized_energy_is_effective_eigenvalue(self):
        # The extracted energy converges to an eigenphase of the one-cycle
        # operator (the effective Hamiltonian H'), not of H itself.
        config = IpeaConfig(delta_e=3 * math.pi, e_prime=0.5, n_bits=18, n_t=2,
                            initial_bits=(0, 0), exact_evolution=False)
        vals, vecs = np.linalg.eigh(hamiltonian_dense(TOY_2Q))
        result = run_ipea(TOY_2Q, config)
        cycle = trotter_cycle(TOY_2Q, config.time / config.n_t, "three-step")
        u_cycle = np.linalg.matrix_power(circuit_unitary(cycle), config.n_t)
        phases, vecs_u = np.linalg.eig(u_cycle)
        effective = np.angle(phases)  # e^{-i E' t} -> E'_n = -angle / t
        candidates = -effective / config.time
        # allow the 2 pi / t wraparound family
        wrap = 2.0 * math.pi / config.time
        diffs = np.min(np.abs(
            (candidates[None, :] - result.energy + wrap / 2) % wrap - wrap / 2
        ))
        assert diffs < config.delta_e * 2.0 ** -config.n_bits * 4

    def test_block_application_count(self):
        config = IpeaConfig(delta_e=4.0, e_prime=0.0, n_bits=5, n_t=3,
                            initial_bits=(0,), exact_evolution=False)
        result = run_ipea(minus_z(), config)
        assert result.controlled_step_applications == 3 * (2 ** 5 - 1)
        assert result.controlled_step_counts is not None

    def test_energy_reconstruction(self):
        bits = {0: 1, 1: 0, 2: 1}
        assert reconstruct_energy(bits, 0.0, 8.0) == pytest.approx(
            -8.0 * (0.5 + 0.125)
        )

    def test_powers_by_squaring(self, rng):
        u = exact_propagator(minus_z(), 0.7)
        powers = evolution_powers(u, 4)
        assert np.allclose(powers[3], np.linalg.matrix_power(u, 8))

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            IpeaConfig(delta_e=-1.0)
        with pytest.raises(ValueError):
            IpeaConfig(n_bits=0)
        with pytest.raises(ValueError):
            IpeaConfig(measurement="median")
