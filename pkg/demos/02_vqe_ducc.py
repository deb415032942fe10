"""VQE with the dUCC-SD ansatz: Adam versus quantum natural gradient.

The five-electron, eight-orbital toy reduces to six qubits after tapering.
Amplitudes start at zero, i.e. at the reference determinant, and both
optimizers descend toward the exact (sector FCI) energy.  The trajectory
table mirrors the convergence plots one would make from trajectory.csv.

Run:
    python demos/02_vqe_ducc.py
"""
import numpy as np

from groundsim import (
    DuccAnsatz,
    enumerate_determinants,
    fci_eigenvalues,
    map_hamiltonian,
    reference_energy,
    run_vqe,
    sector_from_reference,
    symmetry_qubits,
    taper,
)
from groundsim.toys import five_electron_problem
from groundsim.vqe import OptimizerSpec


def main():
    basis, fham, ref = five_electron_problem(seed=14)
    qham = map_hamiltonian(fham)
    parity_q, last_q = symmetry_qubits(basis)
    sector = sector_from_reference(ref.occupations, parity_q, last_q)
    tapered = taper(qham, sector, parity_q, last_q)

    dets = enumerate_determinants(
        basis.n_orbs, ref.n_electrons, basis,
        total_two_m=ref.total_two_m(basis), total_parity=ref.total_parity(basis),
    )
    e_fci = float(np.min(fci_eigenvalues(fham, dets)))
    e_ref = reference_energy(fham, ref)
    print(f"reference energy  : {e_ref:+.10f}")
    print(f"sector FCI energy : {e_fci:+.10f}  ({len(dets)} determinants)")

    ansatz = DuccAnsatz.build(basis, ref)
    print(f"ansatz: {ansatz.n_params} amplitudes "
          f"({sum(1 for e in ansatz.excitations if e.rank == 1)} singles, "
          f"{sum(1 for e in ansatz.excitations if e.rank == 2)} doubles) "
          f"on {ansatz.n_qubits} qubits")

    for kind in ("adam", "qng"):
        result = run_vqe(tapered, ansatz, OptimizerSpec(kind=kind), seed=0,
                         max_iters=400)
        print(f"\n{kind}: E = {result.final_energy:+.10f}, "
              f"|E - E_FCI| = {abs(result.final_energy - e_fci):.2e}, "
              f"{result.iterations} iterations, converged={result.converged}")
        print("  iter       E - E_FCI")
        for it, energy, _ in result.trajectory[::40]:
            print(f"  {it:4d}    {energy - e_fci:12.3e}")


if __name__ == "__main__":
    main()
