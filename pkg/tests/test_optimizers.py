"""Gradients, Fubini-Study metric, Adam recursions, QNG/Tikhonov updates."""
from decimal import Decimal, getcontext

import numpy as np
import pytest

from groundsim.ansatz import DuccAnsatz, HeAnsatz
from groundsim.optimizers import (
    AdamState,
    QngState,
    adam_step,
    ansatz_state,
    energy_gradient,
    fubini_study_metric,
    parameter_shift_gradient,
    qng_step,
    select_lambda,
    tikhonov_curve,
)
from groundsim.pauli import PauliString, PauliTerm, QubitHamiltonian
from groundsim.simulator import expectation
from groundsim.toys import five_electron_problem


def z_hamiltonian(n, q=0, coeff=1.0):
    return QubitHamiltonian(n, [PauliTerm(coeff, PauliString.from_ops(n, {q: "Z"}))])


def random_hamiltonian(n, k, rng):
    terms = [
        PauliTerm(float(rng.uniform(-1, 1)),
                  PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))))
        for _ in range(k)
    ]
    return QubitHamiltonian(n, terms)


def finite_difference_gradient(ansatz, theta, ham, h=1e-5):
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        grad[k] = (expectation(ansatz_state(ansatz, up), ham)
                   - expectation(ansatz_state(ansatz, down), ham)) / (2 * h)
    return grad


class TestGradient:
    def test_single_rotation_analytic(self):
        # zx rotation layer on one qubit: E(t0, t1) = <0|Rx+ Rz+ Z Rz Rx|0> = cos t0
        he = HeAnsatz(1, 0, "merged", "zx")
        ham = z_hamiltonian(1)
        for t0 in (0.0, 0.7, -1.3):
            rep = energy_gradient(he, np.array([t0, 0.4]), ham)
            assert rep.gradient[0] == pytest.approx(-np.sin(t0), abs=1e-12)
            assert rep.gradient[1] == pytest.approx(0.0, abs=1e-12)

    def test_identity_hamiltonian_zero_gradient(self, rng):
        he = HeAnsatz(3, 1)
        ham = QubitHamiltonian(3, [PauliTerm(2.5, PauliString(3, 0, 0))])
        theta = rng.uniform(-np.pi, np.pi, he.n_params)
        assert np.max(np.abs(energy_gradient(he, theta, ham).gradient)) < 1e-12

    def test_he_adjoint_vs_finite_difference_and_shift(self, rng):
        he = HeAnsatz(4, 2, "splitted", "zyz")
        ham = random_hamiltonian(4, 8, rng)
        theta = rng.uniform(-np.pi, np.pi, he.n_params)
        grad = energy_gradient(he, theta, ham).gradient
        assert np.max(np.abs(grad - finite_difference_gradient(he, theta, ham))) < 1e-6
        assert np.max(np.abs(grad - parameter_shift_gradient(he, theta, ham))) < 1e-10

    def test_ducc_adjoint_vs_finite_difference(self, rng):
        basis, ham, ref = five_electron_problem(11)
        from groundsim.fermion import symmetry_qubits
        from groundsim.pauli import map_hamiltonian, sector_from_reference, taper

        qham = map_hamiltonian(ham)
        pq, lq = symmetry_qubits(basis)
        tapered = taper(qham, sector_from_reference(ref.occupations, pq, lq), pq, lq)
        ducc = DuccAnsatz.build(basis, ref)
        theta = rng.uniform(-0.3, 0.3, ducc.n_params)
        grad = energy_gradient(ducc, theta, tapered).gradient
        fd = finite_difference_gradient(ducc, theta, tapered)
        assert np.max(np.abs(grad - fd)) < 1e-6

    def test_parameter_shift_rejected_for_ducc(self):
        basis, ham, ref = five_electron_problem(12)
        ducc = DuccAnsatz.build(basis, ref)
        with pytest.raises(ValueError):
            parameter_shift_gradient(ducc, np.zeros(ducc.n_params), z_hamiltonian(6))


class TestMetric:
    def test_single_ry_quarter(self):
        # One zx layer: the Rx parameter behaves like a single rotation with
        # <dpsi|dpsi> = 1/4 and <dpsi|psi> = 0 at theta = 0 on |0>.
        he = HeAnsatz(1, 0, "merged", "zx")
        for t in (0.0, 0.9):
            F = fubini_study_metric(he, np.array([t, 0.0]))
            assert F[0, 0] == pytest.approx(0.25, abs=1e-12)

    def test_state_invariant_parameter_contributes_zero(self):
        # First gate Rz on |0> only changes global phase: its metric row and
        # column vanish.
        he = HeAnsatz(1, 0, "merged", "zyz")  # rz, ry, rz
        F = fubini_study_metric(he, np.array([0.3, 0.0, 0.0]))
        assert abs(F[0, 0]) < 1e-12
        assert np.max(np.abs(F[0, :])) < 1e-12

    def test_matches_finite_difference_overlaps(self, rng):
        he = HeAnsatz(4, 2, "splitted", "zx")
        theta = rng.uniform(-np.pi, np.pi, he.n_params)
        F = fubini_study_metric(he, theta)
        assert np.max(np.abs(F - F.T)) < 1e-12
        h = 1e-5
        psi = ansatz_state(he, theta).amplitudes
        derivs = []
        for k in range(he.n_params):
            up, down = theta.copy(), theta.copy()
            up[k] += h
            down[k] -= h
            derivs.append(
                (ansatz_state(he, up).amplitudes - ansatz_state(he, down).amplitudes)
                / (2 * h)
            )
        fd = np.zeros_like(F)
        for i in range(he.n_params):
            for j in range(he.n_params):
                fd[i, j] = (
                    np.vdot(derivs[i], derivs[j]).real
                    - np.real(np.vdot(derivs[i], psi) * np.vdot(psi, derivs[j]))
                )
        assert np.max(np.abs(F - fd)) < 1e-6

    def test_positive_semidefinite(self, rng):
        he = HeAnsatz(3, 1)
        theta = rng.uniform(-np.pi, np.pi, he.n_params)
        vals = np.linalg.eigvalsh(fubini_study_metric(he, theta))
        assert vals.min() > -1e-10


def adam_decimal_reference(grads, eta="0.05", eps="1e-8", b1="0.9", b2="0.999"):
    """50-digit scalar reference for the moving-average recursions."""
    getcontext().prec = 50
    eta, eps, b1, b2 = Decimal(eta), Decimal(eps), Decimal(b1), Decimal(b2)
    theta = Decimal(0)
    m = Decimal(0)
    v = Decimal(0)
    for n, g in enumerate(grads, start=1):
        g = Decimal(repr(float(g)))
        b1n = b1 ** n
        b2n = b2 ** n
        m = ((b1 - b1n) * m + (1 - b1) * g) / (1 - b1n)
        v = ((b2 - b2n) * v + (1 - b2) * g * g) / (1 - b2n)
        theta = theta - eta / (v.sqrt() + eps) * m
    return float(theta)


class TestAdam:
    def test_first_step_hand_values(self):
        state = AdamState.initial(1)
        theta, state = adam_step(np.array([0.0]), np.array([1.0]), state)
        assert state.n == 1
        assert state.m[0] == pytest.approx(1.0)
        assert state.v[0] == pytest.approx(1.0)
        assert theta[0] == pytest.approx(-0.05 / (1.0 + 1e-8))

    def test_zero_gradient_never_moves(self):
        state = AdamState.initial(3)
        theta = np.array([0.2, -0.4, 1.0])
        for _ in range(5):
            new_theta, state = adam_step(theta, np.zeros(3), state)
            assert np.array_equal(new_theta, theta)
            theta = new_theta

    def test_two_steps_constant_gradient(self):
        g = 0.3
        state = AdamState.initial(1)
        theta = np.array([0.0])
        for _ in range(2):
            theta, state = adam_step(theta, np.array([g]), state)
        assert theta[0] == pytest.approx(adam_decimal_reference([g, g]), abs=1e-14)

    def test_twenty_step_trajectory_vs_decimal(self, rng):
        grads = rng.uniform(-1.0, 1.0, 20)
        state = AdamState.initial(1)
        theta = np.array([0.0])
        for g in grads:
            theta, state = adam_step(theta, np.array([g]), state)
        assert theta[0] == pytest.approx(adam_decimal_reference(list(grads)), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            adam_step(np.zeros(2), np.zeros(3), AdamState.initial(2))


class TestQng:
    def test_identity_metric_small_lambda_limit(self):
        g = np.array([0.4, -0.2])
        state = QngState(eta=0.05, lambda_grid=np.logspace(-14, -12, 5))
        theta, state = qng_step(np.zeros(2), g, np.eye(2), state)
        assert np.max(np.abs(theta - (-0.05 * g))) < 1e-10
        assert state.last_lambda >= 0.0

    def test_zero_gradient_no_step(self):
        state = QngState()
        theta, state = qng_step(np.array([1.0, 2.0]), np.zeros(2), np.eye(2), state)
        assert np.array_equal(theta, np.array([1.0, 2.0]))

    def test_singular_metric_finite_step(self):
        F = np.diag([1.0, 0.0])
        g = np.array([1.0, 1.0])
        state = QngState(eta=0.05)
        theta, state = qng_step(np.zeros(2), g, F, state)
        lam = state.last_lambda
        # Closed form: dtheta = -eta * diag(1/(1+lam), 0) g for diagonal F.
        assert np.isfinite(theta).all()
        assert theta[1] == pytest.approx(0.0, abs=1e-12)
        assert theta[0] == pytest.approx(-0.05 / (1.0 + lam), rel=1e-10)

    def test_normal_equations_satisfied(self, rng):
        n = 6
        A = rng.standard_normal((n, n))
        F = A @ A.T / n
        g = rng.standard_normal(n)
        state = QngState(eta=0.05)
        theta, state = qng_step(np.zeros(n), g, F, state)
        lam = state.last_lambda
        residual = (F.T @ F + lam * np.eye(n)) @ theta + 0.05 * (F.T @ g)
        assert np.max(np.abs(residual)) < 1e-10

    def test_residual_monotone_in_lambda(self, rng):
        n = 5
        A = rng.standard_normal((n, n))
        F = A @ A.T / n
        g = rng.standard_normal(n)
        grid = np.logspace(-8, 2, 25)
        residuals, _ = tikhonov_curve(F, g, 0.05, grid)
        # Residual norm is non-increasing in 1/lambda, i.e. non-decreasing
        # along the ascending lambda grid.
        assert np.all(np.diff(residuals) >= -1e-12)

    def test_rejects_asymmetric_metric(self):
        F = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            qng_step(np.zeros(2), np.ones(2), F, QngState())

    def test_selected_lambda_on_grid(self, rng):
        n = 4
        A = rng.standard_normal((n, n))
        F = A @ A.T / n
        g = rng.standard_normal(n)
        grid = np.logspace(-8, 2, 25)
        lam = select_lambda(F, g, 0.05, grid)
        assert lam in grid
