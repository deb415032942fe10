"""VQE orchestration: optimizer loop, convergence, multi-run HE campaigns.

Initialization policy: dUCC amplitudes start at zero (the search begins at
the reference determinant); HE parameters are drawn uniformly from
[-pi, pi) under the run seed.  The variational lower bound E >= E_FCI is
enforced as a runtime assertion whenever the exact energy is available.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import DuccAnsatz, HeAnsatz
from .optimizers import (
    AdamState,
    QngState,
    adam_step,
    ansatz_state,
    energy_gradient,
    fubini_study_metric,
    qng_step,
)
from .pauli import QubitHamiltonian
from .simulator import exact_ground_energy, expectation

VARIATIONAL_SLACK = 1e-9
FCI_QUBIT_LIMIT = 12


@dataclass
class OptimizerSpec:
    kind: str = "adam"
    eta: float = 0.05
    epsilon: float = 1e-8
    beta1: float = 0.9
    beta2: float = 0.999
    lambda_grid: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("adam", "qng"):
            raise ValueError("optimizer must be 'adam' or 'qng'")


@dataclass
class VqeRunResult:
    final_energy: float
    final_theta: np.ndarray
    trajectory: list[tuple[int, float, float]]  # (iteration, energy, grad norm)
    iterations: int
    converged: bool
    seed: int | None
    error: str | None = None

    def __post_init__(self):
        if self.trajectory and self.error is None:
            assert self.final_energy == self.trajectory[-1][1]


def _initial_theta(ansatz, seed: int | None) -> np.ndarray:
    if isinstance(ansatz, DuccAnsatz):
        return np.zeros(ansatz.n_params)
    if isinstance(ansatz, HeAnsatz):
        rng = np.random.default_rng(seed)
        return rng.uniform(-np.pi, np.pi, size=ansatz.n_params)
    raise TypeError(f"unsupported ansatz type {type(ansatz)!r}")


def run_vqe(ham: QubitHamiltonian, ansatz, optimizer: OptimizerSpec | None = None,
            seed: int | None = 0, max_iters: int = 1000, tol_e: float = 1e-9,
            patience: int = 10, fci_energy: float | None = None,
            check_variational_bound: bool = True) -> VqeRunResult:
    """Minimize <psi(theta)|H|psi(theta)> with Adam or QNG.

    Stops at max_iters or when |dE| < tol_e for `patience` consecutive
    iterations.  Deterministic for a fixed seed.
    """
    optimizer = optimizer or OptimizerSpec()
    if ansatz.n_qubits != ham.n_qubits:
        raise ValueError("ansatz and Hamiltonian qubit counts differ")
    theta = _initial_theta(ansatz, seed)
    if check_variational_bound and fci_energy is None and ham.n_qubits <= FCI_QUBIT_LIMIT:
        fci_energy, _ = exact_ground_energy(ham)

    if optimizer.kind == "adam":
        opt_state = AdamState.initial(
            theta.size, optimizer.eta, optimizer.epsilon, optimizer.beta1, optimizer.beta2
        )
    else:
        grid = optimizer.lambda_grid
        opt_state = QngState(eta=optimizer.eta) if grid is None else QngState(
            eta=optimizer.eta, lambda_grid=np.asarray(grid, dtype=float)
        )

    trajectory: list[tuple[int, float, float]] = []
    energy = expectation(ansatz_state(ansatz, theta), ham)
    quiet = 0
    iteration = 0
    for iteration in range(1, max_iters + 1):
        report = energy_gradient(ansatz, theta, ham)
        grad_norm = float(np.linalg.norm(report.gradient))
        trajectory.append((iteration, energy, grad_norm))
        if optimizer.kind == "adam":
            theta, opt_state = adam_step(theta, report.gradient, opt_state)
        else:
            metric = fubini_study_metric(ansatz, theta)
            theta, opt_state = qng_step(theta, report.gradient, metric, opt_state)
        new_energy = expectation(ansatz_state(ansatz, theta), ham)
        quiet = quiet + 1 if abs(new_energy - energy) < tol_e else 0
        energy = new_energy
        if quiet >= patience:
            break
    converged = quiet >= patience
    trajectory.append((iteration + 1, energy,
                       float(np.linalg.norm(energy_gradient(ansatz, theta, ham).gradient))))

    if fci_energy is not None:
        assert energy >= fci_energy - VARIATIONAL_SLACK, (
            f"variational bound violated: E = {energy} < E_FCI = {fci_energy}"
        )
    return VqeRunResult(
        final_energy=energy,
        final_theta=theta,
        trajectory=trajectory,
        iterations=iteration,
        converged=converged,
        seed=seed,
    )


@dataclass
class CampaignResult:
    runs: list[VqeRunResult]
    best_index: int

    @property
    def best(self) -> VqeRunResult:
        return self.runs[self.best_index]


def run_he_campaign(ham: QubitHamiltonian, ansatz: HeAnsatz,
                    optimizer: OptimizerSpec | None = None, master_seed: int = 0,
                    max_iters: int = 1000, tol_e: float = 1e-9,
                    n_runs: int | None = None) -> CampaignResult:
    """floor(n_params / 2) independent runs from distinct derived seeds.

    The best run is selected by final energy; a failed run is recorded with
    its error marker and does not abort the campaign.
    """
    if n_runs is None:
        n_runs = ansatz.n_params // 2
    seeds = np.random.SeedSequence(master_seed).generate_state(n_runs)
    if ham.n_qubits <= FCI_QUBIT_LIMIT:
        fci_energy, _ = exact_ground_energy(ham)
    else:
        fci_energy = None
    runs: list[VqeRunResult] = []
    for run_seed in seeds:
        try:
            runs.append(
                run_vqe(ham, ansatz, optimizer, seed=int(run_seed),
                        max_iters=max_iters, tol_e=tol_e, fci_energy=fci_energy)
            )
        except Exception as exc:  # noqa: BLE001 - recorded, not fatal
            runs.append(
                VqeRunResult(float("nan"), np.array([]), [], 0, False,
                             int(run_seed), error=str(exc))
            )
    valid = [i for i, r in enumerate(runs) if r.error is None]
    if not valid:
        raise RuntimeError("every campaign run failed")
    best = min(valid, key=lambda i: runs[i].final_energy)
    return CampaignResult(runs=runs, best_index=best)
