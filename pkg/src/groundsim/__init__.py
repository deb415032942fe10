"""groundsim: ground-state energies of small fermionic systems by simulated
quantum algorithms (VQE with dUCC-SD / hardware-efficient ansatze, iterative
phase estimation), with Pauli-exponential circuit compilation and an internal
exact-diagonalization oracle.
"""
from .fermion import (
    FermionHamiltonian,
    OccupationDeterminant,
    OrbitalBasis,
    SpinOrbital,
    enumerate_determinants,
    fci_eigenvalues,
    fci_matrix,
    load_integrals,
    reference_energy,
    reorder_odd_before_even,
    save_integrals,
    symmetry_qubits,
)
from .pauli import (
    PauliString,
    PauliTerm,
    QubitHamiltonian,
    TaperSector,
    map_hamiltonian,
    parity_annihilation,
    parity_creation,
    parity_encode_bits,
    partition_commuting,
    sector_from_reference,
    taper,
    taper_reference_bits,
)
from .simulator import (
    Circuit,
    Gate,
    StateVector,
    apply_circuit,
    apply_pauli_exponential,
    exact_ground_energy,
    expectation,
    prepare_basis_state,
)
from .compiler import (
    ExponentialGroup,
    GateCounts,
    LinearMapGF2,
    circuit_to_text,
    compile_greedy,
    compile_group,
    compile_three_step,
    diagonalize_group,
    gate_counts,
    make_controlled,
    synthesize_linear_inverse,
    synthesize_phase_network,
)
from .ansatz import (
    DuccAnsatz,
    Excitation,
    HeAnsatz,
    build_ducc_circuit,
    build_he_circuit,
    enumerate_sd_excitations,
    excitation_generators,
)
from .optimizers import (
    AdamState,
    GradientReport,
    QngState,
    adam_step,
    ansatz_state,
    energy_gradient,
    fubini_study_metric,
    parameter_shift_gradient,
    qng_step,
)
from .vqe import CampaignResult, OptimizerSpec, VqeRunResult, run_he_campaign, run_vqe
from .ipea import (
    BitRecord,
    IpeaConfig,
    IpeaResult,
    exact_propagator,
    ipea_bit,
    run_ipea,
    trotter_cycle,
    trotterized_evolution,
)
from .measurement import sampled_expectation

__version__ = "0.1.0"
